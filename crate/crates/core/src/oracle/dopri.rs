//! Dormand–Prince 5(4) with PI step-size control and Hairer's fourth-order
//! continuous extension, over fixed-size real state vectors.

use super::OracleError;

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// Step-size controller (Hairer, Nørsett & Wanner defaults).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Adaptive Dormand–Prince integrator.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            max_steps: 10_000_000,
        }
    }

    fn error_norm<const N: usize>(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut sum = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            sum += (err[i] / sc).powi(2);
        }
        (sum / N as f64).sqrt()
    }

    fn initial_step<const N: usize, F>(&self, f: &F, t0: f64, y0: &[f64; N], f0: &[f64; N], dir: f64) -> f64
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let scale = |v: &[f64; N], i: usize| self.atol + self.rtol * v[i].abs();
        let norm = |v: &[f64; N], w: &[f64; N]| {
            (v.iter().enumerate().map(|(i, x)| (x / scale(w, i)).powi(2)).sum::<f64>() / N as f64).sqrt()
        };
        let d0 = norm(y0, y0);
        let d1 = norm(f0, y0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: [f64; N] = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
        let f1 = f(t0 + dir * h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| f1[i] - f0[i]);
        let d2 = norm(&diff, y0) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    /// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each
    /// of `times`, which must be monotone in the direction of integration and
    /// not precede `t0`. Integration runs backwards when `times` lie before
    /// `t0`.
    pub fn solve<const N: usize, F>(
        &self,
        f: F,
        t0: f64,
        y0: [f64; N],
        times: &[f64],
    ) -> Result<Vec<[f64; N]>, OracleError>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let mut out = Vec::with_capacity(times.len());
        let Some(&t_last) = times.last() else {
            return Ok(out);
        };
        let dir = if t_last >= t0 { 1.0 } else { -1.0 };
        let mut previous = t0;
        for &t in times {
            if !t.is_finite() || (t - previous) * dir < 0.0 {
                return Err(OracleError::SampleTimes);
            }
            previous = t;
        }

        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&f, t0, &y0, &k1, dir);
        let mut fac_old = 1e-4_f64;
        let mut next_sample = 0;
        let mut steps = 0;

        while next_sample < times.len() && times[next_sample] == t {
            out.push(y);
            next_sample += 1;
        }

        let expo = 0.2 - 0.75 * BETA;
        let mut rejected = false;
        while next_sample < times.len() {
            if steps >= self.max_steps {
                return Err(OracleError::Stiffness { t });
            }
            // Do not run past the final requested time.
            let remaining = (t_last - t) * dir;
            if remaining <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                out.resize(times.len(), y);
                break;
            }
            if h > remaining {
                h = remaining;
            }
            if h <= 1e-14 * t.abs().max(1.0) {
                return Err(OracleError::Stiffness { t });
            }
            let hs = dir * h;

            let mut stage = [0.0; N];
            for i in 0..N {
                stage[i] = y[i] + hs * A21 * k1[i];
            }
            let k2 = f(t + C2 * hs, &stage);
            for i in 0..N {
                stage[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = f(t + C3 * hs, &stage);
            for i in 0..N {
                stage[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = f(t + C4 * hs, &stage);
            for i in 0..N {
                stage[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = f(t + C5 * hs, &stage);
            for i in 0..N {
                stage[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let k6 = f(t + hs, &stage);
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i]
                    + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let t_new = if h == remaining { t_last } else { t + hs };
            let k7 = f(t_new, &y_new);
            steps += 1;

            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let err_norm = self.error_norm(&y, &y_new, &err);
            if !err_norm.is_finite() {
                h *= FAC_MIN;
                rejected = true;
                continue;
            }
            let fac11 = err_norm.powf(expo);

            if err_norm <= 1.0 {
                // Continuous extension over [t, t_new].
                let mut cont = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y_new[i] - y[i];
                    let bspl = hs * k1[i] - dy;
                    cont[0][i] = y[i];
                    cont[1][i] = dy;
                    cont[2][i] = bspl;
                    cont[3][i] = dy - hs * k7[i] - bspl;
                    cont[4][i] = hs
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                while next_sample < times.len() && (times[next_sample] - t_new) * dir <= 0.0 {
                    let ts = times[next_sample];
                    if ts == t_new {
                        out.push(y_new);
                    } else {
                        let theta = (ts - t) / hs;
                        let theta1 = 1.0 - theta;
                        out.push(std::array::from_fn(|i| {
                            cont[0][i]
                                + theta
                                    * (cont[1][i]
                                        + theta1 * (cont[2][i] + theta * (cont[3][i] + theta1 * cont[4][i])))
                        }));
                    }
                    next_sample += 1;
                }

                let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                fac_old = err_norm.max(1e-4);
                let mut h_new = h / fac;
                if rejected {
                    h_new = h_new.min(h);
                }
                rejected = false;
                t = t_new;
                y = y_new;
                k1 = k7;
                h = h_new;
            } else {
                h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
                rejected = true;
            }
        }
        Ok(out)
    }
}
