//! High-accuracy numerical solution of the amplitude system
//!
//! ```text
//! f₁' = γ₁ f₂ f₃,   f₂' = γ₂ f₁ f₃*,   f₃' = γ₃ f₁ f₂*
//! ```
//!
//! used as the reference against which the closed form is judged. The three
//! complex amplitudes are integrated as six real equations with an adaptive
//! Dormand–Prince pair. Along every trajectory the module tracks
//!
//! * the Hamiltonian functional `H = f₁* f₂ f₃`, whose imaginary part is
//!   conserved and whose real part drives `d|fⱼ|²/dt = 2γⱼ Re H`;
//! * the three Manley–Rowe combinations `γᵢ|fⱼ|² − γⱼ|fᵢ|²`, all conserved.

mod dopri;

use num_complex::Complex64;
use thiserror::Error;

use crate::triad::InitialAmplitudes;

pub use dopri::Dopri5;

/// Default per-step tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("step size underflow at t = {t} (stiff or singular problem)")]
    Stiffness { t: f64 },
    #[error("sample times must be finite and monotone in the integration direction")]
    SampleTimes,
    #[error("tolerance {0} outside [1e-13, 1e-6]")]
    Tolerance(f64),
    #[error("final time must be positive and finite, got {0}")]
    FinalTime(f64),
    #[error("need at least two minima of |f1|^2 to measure a period, found {found}")]
    InsufficientSpan { found: usize },
}

/// Three complex amplitudes at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeState {
    pub t: f64,
    pub f: [Complex64; 3],
}

/// Right-hand side of the amplitude system.
#[inline]
pub fn rhs(f: &[Complex64; 3], gamma: [f64; 3]) -> [Complex64; 3] {
    [
        gamma[0] * f[1] * f[2],
        gamma[1] * f[0] * f[2].conj(),
        gamma[2] * f[0] * f[1].conj(),
    ]
}

/// One classical RK4 step of the amplitude system. The spectral simulator
/// applies exactly this map at every grid point.
#[inline]
pub fn rk4_step(f: &[Complex64; 3], gamma: [f64; 3], dt: f64) -> [Complex64; 3] {
    let axpy = |a: &[Complex64; 3], s: f64, k: &[Complex64; 3]| -> [Complex64; 3] {
        [a[0] + k[0] * s, a[1] + k[1] * s, a[2] + k[2] * s]
    };
    let k1 = rhs(f, gamma);
    let k2 = rhs(&axpy(f, 0.5 * dt, &k1), gamma);
    let k3 = rhs(&axpy(f, 0.5 * dt, &k2), gamma);
    let k4 = rhs(&axpy(f, dt, &k3), gamma);
    let w = dt / 6.0;
    std::array::from_fn(|j| f[j] + (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * w)
}

/// `(Re{f₁* f₂ f₃}, Im{f₁* f₂ f₃})`.
pub fn hamiltonian_functionals(state: &AmplitudeState) -> (f64, f64) {
    let h = hamiltonian(&state.f);
    (h.re, h.im)
}

#[inline]
fn hamiltonian(f: &[Complex64; 3]) -> Complex64 {
    f[0].conj() * f[1] * f[2]
}

/// Time derivative of `H = f₁* f₂ f₃` along the flow,
/// `γ₁|f₂f₃|² + γ₂|f₁f₃|² + γ₃|f₁f₂|²`, which is real.
pub fn hamiltonian_rate(f: &[Complex64; 3], gamma: [f64; 3]) -> f64 {
    let n = f.map(|z| z.norm_sqr());
    gamma[0] * n[1] * n[2] + gamma[1] * n[0] * n[2] + gamma[2] * n[0] * n[1]
}

/// `[γ₂|f₁|² − γ₁|f₂|², γ₃|f₂|² − γ₂|f₃|², γ₃|f₁|² − γ₁|f₃|²]`.
pub fn manley_rowe(f: &[Complex64; 3], gamma: [f64; 3]) -> [f64; 3] {
    let n = f.map(|z| z.norm_sqr());
    [
        gamma[1] * n[0] - gamma[0] * n[1],
        gamma[2] * n[1] - gamma[1] * n[2],
        gamma[2] * n[0] - gamma[0] * n[2],
    ]
}

/// Time-sampled solution of the amplitude system with per-sample
/// diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub gamma: [f64; 3],
    pub samples: Vec<AmplitudeState>,
    pub hamiltonian_re: Vec<f64>,
    pub hamiltonian_im: Vec<f64>,
    pub manley_rowe: Vec<[f64; 3]>,
}

impl AmplitudeTrajectory {
    pub fn from_samples(gamma: [f64; 3], samples: Vec<AmplitudeState>) -> Self {
        let h: Vec<Complex64> = samples.iter().map(|s| hamiltonian(&s.f)).collect();
        Self {
            gamma,
            hamiltonian_re: h.iter().map(|z| z.re).collect(),
            hamiltonian_im: h.iter().map(|z| z.im).collect(),
            manley_rowe: samples.iter().map(|s| manley_rowe(&s.f, gamma)).collect(),
            samples,
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// `|fⱼ|²` at every sample.
    pub fn norms_sqr(&self) -> Vec<[f64; 3]> {
        self.samples.iter().map(|s| s.f.map(|z| z.norm_sqr())).collect()
    }

    /// Largest departure of `Im H` from its initial value.
    pub fn hamiltonian_im_drift(&self) -> f64 {
        drift(&self.hamiltonian_im)
    }

    /// Largest `|fⱼ|` over the trajectory.
    pub fn max_amplitude(&self) -> f64 {
        self.samples
            .iter()
            .flat_map(|s| s.f.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&AmplitudeState> {
        self.samples.last()
    }
}

fn drift(series: &[f64]) -> f64 {
    match series.first() {
        Some(&first) => series.iter().map(|v| (v - first).abs()).fold(0.0, f64::max),
        None => 0.0,
    }
}

fn pack(f: &[Complex64; 3]) -> [f64; 6] {
    [f[0].re, f[0].im, f[1].re, f[1].im, f[2].re, f[2].im]
}

fn unpack(y: &[f64; 6]) -> [Complex64; 3] {
    [
        Complex64::new(y[0], y[1]),
        Complex64::new(y[2], y[3]),
        Complex64::new(y[4], y[5]),
    ]
}

fn check_tol(tol: f64) -> Result<(), OracleError> {
    if (1e-13..=1e-6).contains(&tol) {
        Ok(())
    } else {
        Err(OracleError::Tolerance(tol))
    }
}

/// Integrates from `t = 0` and samples at `times` (monotone, any direction).
pub fn integrate_at(
    init: &InitialAmplitudes,
    gamma: [f64; 3],
    times: &[f64],
    tol: f64,
) -> Result<AmplitudeTrajectory, OracleError> {
    check_tol(tol)?;
    integrate_from(0.0, &init.psi0(), gamma, times, tol)
}

/// Integrates from an arbitrary state.
pub fn integrate_from(
    t0: f64,
    f0: &[Complex64; 3],
    gamma: [f64; 3],
    times: &[f64],
    tol: f64,
) -> Result<AmplitudeTrajectory, OracleError> {
    check_tol(tol)?;
    let system = |_: f64, y: &[f64; 6]| pack(&rhs(&unpack(y), gamma));
    let states = Dopri5::new(tol).solve(system, t0, pack(f0), times)?;
    let samples = times
        .iter()
        .zip(&states)
        .map(|(&t, y)| AmplitudeState { t, f: unpack(y) })
        .collect();
    Ok(AmplitudeTrajectory::from_samples(gamma, samples))
}

/// Integrates over `[0, t_end]` with `samples` equally spaced outputs
/// (including both end points; at least two).
pub fn integrate(
    init: &InitialAmplitudes,
    gamma: [f64; 3],
    t_end: f64,
    tol: f64,
    samples: usize,
) -> Result<AmplitudeTrajectory, OracleError> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(OracleError::FinalTime(t_end));
    }
    integrate_at(init, gamma, &uniform_times(t_end, samples), tol)
}

/// `n` equally spaced times on `[0, t_end]` (at least the two end points).
pub fn uniform_times(t_end: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let mut times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
    times[n - 1] = t_end;
    times
}

/// Fixed-step RK4 over `[0, t_end]`, returning the final amplitudes.
pub fn integrate_fixed(
    init: &InitialAmplitudes,
    gamma: [f64; 3],
    t_end: f64,
    steps: usize,
) -> [Complex64; 3] {
    let dt = t_end / steps as f64;
    let mut f = init.psi0();
    for _ in 0..steps {
        f = rk4_step(&f, gamma, dt);
    }
    f
}

/// Maximum drift of each Manley–Rowe combination from its initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    pub max_drift: [f64; 3],
    /// `max|γ| · Σ|fⱼ(0)|²`, the natural size of the combinations.
    pub scale: f64,
}

impl DriftReport {
    pub fn worst(&self) -> f64 {
        self.max_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn worst_relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.worst() / self.scale
        } else {
            self.worst()
        }
    }
}

pub fn manley_rowe_invariants(traj: &AmplitudeTrajectory, gamma: [f64; 3]) -> DriftReport {
    let series: Vec<[f64; 3]> = traj.samples.iter().map(|s| manley_rowe(&s.f, gamma)).collect();
    let max_drift = std::array::from_fn(|c| drift(&series.iter().map(|v| v[c]).collect::<Vec<_>>()));
    let gmax = gamma.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    let mass: f64 = traj
        .samples
        .first()
        .map(|s| s.f.iter().map(|z| z.norm_sqr()).sum())
        .unwrap_or(0.0);
    DriftReport {
        max_drift,
        scale: gmax * mass,
    }
}

/// Period estimate from successive minima of `|f₁|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodEstimate {
    pub period: f64,
    /// Standard error of the mean spacing, relative to the period.
    pub relative_uncertainty: f64,
    /// Interpolated times of the interior minima.
    pub minima: Vec<f64>,
}

/// Locates interior minima of `|f₁|²`, refines each by the vertex of the
/// parabola through the three bracketing samples, and averages the spacing.
pub fn measure_period(traj: &AmplitudeTrajectory) -> Result<PeriodEstimate, OracleError> {
    let times: Vec<f64> = traj.times().collect();
    let values: Vec<f64> = traj.samples.iter().map(|s| s.f[0].norm_sqr()).collect();
    measure_period_of(&times, &values)
}

/// [`measure_period`] for an arbitrary sampled series.
pub fn measure_period_of(times: &[f64], values: &[f64]) -> Result<PeriodEstimate, OracleError> {
    let mut minima = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if b <= a && b < c {
            minima.push(parabola_vertex(
                [times[i - 1], times[i], times[i + 1]],
                [a, b, c],
            ));
        }
    }
    if minima.len() < 2 {
        return Err(OracleError::InsufficientSpan {
            found: minima.len(),
        });
    }
    let spacings: Vec<f64> = minima.windows(2).map(|w| w[1] - w[0]).collect();
    let n = spacings.len() as f64;
    let period = (minima[minima.len() - 1] - minima[0]) / n;
    let relative_uncertainty = if spacings.len() > 1 {
        let var = spacings.iter().map(|s| (s - period).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt() / period
    } else {
        0.0
    };
    Ok(PeriodEstimate {
        period,
        relative_uncertainty,
        minima,
    })
}

fn parabola_vertex(t: [f64; 3], v: [f64; 3]) -> f64 {
    // Work relative to the middle sample to keep the arithmetic well scaled.
    let (h0, h1) = (t[0] - t[1], t[2] - t[1]);
    let (d0, d1) = (v[0] - v[1], v[2] - v[1]);
    // v(s) − v₁ = p·s² + q·s through (h0, d0), (h1, d1).
    let det = h0 * h1 * (h0 - h1);
    let p = (d0 * h1 - d1 * h0) / det;
    let q = (d1 * h0 * h0 - d0 * h1 * h1) / det;
    if p <= 0.0 {
        return t[1];
    }
    t[1] - q / (2.0 * p)
}
