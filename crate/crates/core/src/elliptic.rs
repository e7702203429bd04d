//! Jacobi elliptic functions `sn`, `cn`, `dn` and the complete elliptic
//! integral of the first kind `K(k)`.
//!
//! Everything here is expressed in terms of the *modulus* `k` (not the
//! parameter `m = k²`). `K` comes from the arithmetic-geometric mean,
//!
//! ```text
//! K(k) = π / (2 · AGM(1, √(1 − k²)))
//! ```
//!
//! and `sn`/`cn`/`dn` from the descending Landen sequence of the same AGM,
//! followed by backward recovery of the amplitude `φ` with
//! `φₙ₋₁ = (φₙ + asin(cₙ/aₙ · sin φₙ)) / 2`.
//!
//! Arguments are reduced modulo the real period `4K` before the recursion, so
//! evaluating far out along the real axis costs no more than near the origin.
//! `k = 1` takes the exact hyperbolic branch (`tanh`, `sech`, `sech`).

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

/// Upper bound on AGM iterations. Convergence is quadratic; fewer than ten
/// steps are needed for any `k` whose complement is representable.
const MAX_AGM_STEPS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EllipticError {
    #[error("elliptic modulus must be finite and lie in [0, 1], got {0}")]
    Modulus(f64),
    #[error("argument must be finite, got {0}")]
    Domain(f64),
    #[error("complete elliptic integral diverges at k = {0}")]
    Divergent(f64),
}

/// Elliptic modulus `k ∈ [0, 1]`, together with its complement `1 − k²`.
///
/// The complement is stored as `(1 − k)(1 + k)`, which keeps full relative
/// precision as `k → 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    k: f64,
    k_complement_sq: f64,
}

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !k.is_finite() || !(0.0..=1.0).contains(&k) {
            return Err(EllipticError::Modulus(k));
        }
        Ok(Self {
            k,
            k_complement_sq: (1.0 - k) * (1.0 + k),
        })
    }

    #[inline]
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `1 − k²`.
    #[inline]
    pub fn k_complement_sq(&self) -> f64 {
        self.k_complement_sq
    }

    /// Complementary modulus `k' = √(1 − k²)`.
    #[inline]
    pub fn k_complement(&self) -> f64 {
        self.k_complement_sq.sqrt()
    }

    /// `true` when `k` is within half an ulp of one, where `K(k)` is treated
    /// as infinite.
    #[inline]
    fn is_singular(&self) -> bool {
        1.0 - self.k <= f64::EPSILON / 2.0
    }
}

/// Values of `sn`, `cn`, `dn` at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Arithmetic-geometric mean of `1` and `b`, for `0 < b ≤ 1`.
fn agm_unit(b: f64) -> f64 {
    let mut a = 1.0_f64;
    let mut b = b;
    for _ in 0..MAX_AGM_STEPS {
        if a - b <= 4.0 * f64::EPSILON * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, `K(k)`.
///
/// Fails with [`EllipticError::Divergent`] when `k` is within half an ulp of
/// one.
pub fn complete_elliptic_k(m: EllipticModulus) -> Result<f64, EllipticError> {
    if m.is_singular() {
        return Err(EllipticError::Divergent(m.k));
    }
    Ok(FRAC_PI_2 / agm_unit(m.k_complement()))
}

/// Descending Landen sequence `(aₙ, cₙ)` for the given modulus, plus `K(k)`.
struct Landen {
    a: [f64; MAX_AGM_STEPS + 1],
    c: [f64; MAX_AGM_STEPS + 1],
    len: usize,
    quarter_period: f64,
}

impl Landen {
    fn new(m: EllipticModulus) -> Self {
        let mut a = [0.0; MAX_AGM_STEPS + 1];
        let mut c = [0.0; MAX_AGM_STEPS + 1];
        a[0] = 1.0;
        c[0] = m.k;
        let mut b = m.k_complement();
        let mut n = 0;
        // cₙ₊₁ = cₙ² / (4aₙ₊₁) avoids the cancellation in (aₙ − bₙ)/2.
        while n < MAX_AGM_STEPS && c[n] > f64::EPSILON * a[n] {
            let a_next = 0.5 * (a[n] + b);
            b = (a[n] * b).sqrt();
            c[n + 1] = c[n] * c[n] / (4.0 * a_next);
            a[n + 1] = a_next;
            n += 1;
        }
        Self {
            a,
            c,
            len: n,
            quarter_period: FRAC_PI_2 / a[n],
        }
    }

    /// Amplitude `φ = am(u, k)` for `u` already reduced to `[−2K, 2K]`.
    fn amplitude(&self, u: f64) -> f64 {
        let n = self.len;
        let mut phi = (1u64 << n) as f64 * self.a[n] * u;
        for i in (1..=n).rev() {
            let ratio = self.c[i] / self.a[i] * phi.sin();
            phi = 0.5 * (phi + ratio.asin());
        }
        phi
    }
}

/// Reduces `u` into `[−2K, 2K]` using the real period `4K`.
fn reduce_argument(u: f64, quarter_period: f64) -> f64 {
    let period = 4.0 * quarter_period;
    let turns = (u / period).round();
    if turns == 0.0 {
        u
    } else {
        u - turns * period
    }
}

/// Jacobi elliptic functions `sn(u, k)`, `cn(u, k)`, `dn(u, k)`.
pub fn jacobi_sn_cn_dn(u: f64, m: EllipticModulus) -> Result<JacobiTriple, EllipticError> {
    if !u.is_finite() {
        return Err(EllipticError::Domain(u));
    }
    if m.k == 1.0 {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        });
    }
    if m.k == 0.0 {
        let (sn, cn) = u.sin_cos();
        return Ok(JacobiTriple { sn, cn, dn: 1.0 });
    }

    let landen = Landen::new(m);
    let phi = landen.amplitude(reduce_argument(u, landen.quarter_period));
    let (sn, cn) = phi.sin_cos();
    // 1 − k²sn² = k'² + k²cn²; the second form avoids cancellation near
    // sn = ±1 when k is close to one.
    let k_sq = m.k * m.k;
    let dn = if sn * sn <= 0.5 {
        (1.0 - k_sq * sn * sn).sqrt()
    } else {
        (m.k_complement_sq + k_sq * cn * cn).sqrt()
    };
    Ok(JacobiTriple { sn, cn, dn })
}

/// `sn²(u, k)`, the form in which the triad amplitudes use `sn`.
pub fn sn_squared(u: f64, m: EllipticModulus) -> Result<f64, EllipticError> {
    let sn = jacobi_sn_cn_dn(u, m)?.sn;
    Ok(sn * sn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modulus(k: f64) -> EllipticModulus {
        EllipticModulus::new(k).unwrap()
    }

    #[test]
    fn modulus_rejects_out_of_range() {
        assert_eq!(
            EllipticModulus::new(1.5),
            Err(EllipticError::Modulus(1.5))
        );
        assert!(EllipticModulus::new(-0.1).is_err());
        assert!(EllipticModulus::new(f64::NAN).is_err());
        assert!(EllipticModulus::new(f64::INFINITY).is_err());
    }

    #[test]
    fn complement_is_accurate_near_one() {
        let k = 1.0 - 1e-12;
        let m = modulus(k);
        let exact = 2e-12 - 1e-24;
        assert!((m.k_complement_sq() - exact).abs() <= 1e-4 * exact);
    }

    #[test]
    fn k_at_zero_is_half_pi() {
        assert_eq!(complete_elliptic_k(modulus(0.0)).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn k_diverges_at_one() {
        assert_eq!(
            complete_elliptic_k(modulus(1.0)),
            Err(EllipticError::Divergent(1.0))
        );
        let k = 1.0 - 1e-16;
        assert!(matches!(
            complete_elliptic_k(modulus(k)),
            Err(EllipticError::Divergent(_))
        ));
    }

    #[test]
    fn k_close_to_one_is_finite_and_logarithmic() {
        // K ~ ln(4/k') as k → 1.
        let k = 1.0 - 1e-10;
        let m = modulus(k);
        let big_k = complete_elliptic_k(m).unwrap();
        let asymptote = (4.0 / m.k_complement()).ln();
        assert!((big_k - asymptote).abs() < 1e-8);
    }

    #[test]
    fn values_at_origin() {
        for k in [0.0, 0.3, 0.9, 1.0] {
            let t = jacobi_sn_cn_dn(0.0, modulus(k)).unwrap();
            assert_eq!((t.sn, t.cn, t.dn), (0.0, 1.0, 1.0));
        }
    }

    #[test]
    fn trigonometric_limit() {
        let t = jacobi_sn_cn_dn(FRAC_PI_2, modulus(0.0)).unwrap();
        assert!((t.sn - 1.0).abs() < 1e-15);
        assert!(t.cn.abs() < 1e-15);
        assert_eq!(t.dn, 1.0);
        for u in [-4.0, 0.3, 2.0, 17.5] {
            let t = jacobi_sn_cn_dn(u, modulus(0.0)).unwrap();
            assert!((t.sn - f64::sin(u)).abs() < 1e-15);
            assert!((t.cn - f64::cos(u)).abs() < 1e-15);
        }
    }

    #[test]
    fn hyperbolic_limit() {
        let t = jacobi_sn_cn_dn(1.0, modulus(1.0)).unwrap();
        assert!((t.sn - 0.761_594_155_955_764_9).abs() < 1e-15);
        let sech = 1.0 / 1.0_f64.cosh();
        assert!((t.cn - sech).abs() < 1e-15);
        assert!((t.dn - sech).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_argument() {
        assert!(matches!(
            jacobi_sn_cn_dn(f64::NAN, modulus(0.5)),
            Err(EllipticError::Domain(_))
        ));
        assert!(matches!(
            jacobi_sn_cn_dn(f64::INFINITY, modulus(0.5)),
            Err(EllipticError::Domain(_))
        ));
        assert!(sn_squared(f64::NEG_INFINITY, modulus(0.5)).is_err());
    }

    #[test]
    fn quarter_period_is_maximum() {
        for k in [0.1, 0.5, 0.8, 0.99] {
            let m = modulus(k);
            let quarter = complete_elliptic_k(m).unwrap();
            let t = jacobi_sn_cn_dn(quarter, m).unwrap();
            assert!((t.sn - 1.0).abs() < 1e-15, "k = {k}: sn(K) = {}", t.sn);
            assert!(t.cn.abs() < 1e-8);
            assert!((t.dn - m.k_complement()).abs() < 1e-12);
            assert!((sn_squared(quarter, m).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sn_squared_matches_square_of_sn() {
        let m = modulus(0.7);
        for i in 0..50 {
            let u = -6.0 + 0.25 * i as f64;
            let sn = jacobi_sn_cn_dn(u, m).unwrap().sn;
            let sq = sn_squared(u, m).unwrap();
            assert!((sq - sn * sn).abs() <= 2.0 * f64::EPSILON * sq.max(f64::MIN_POSITIVE));
            assert!((0.0..=1.0).contains(&sq));
        }
    }

    #[test]
    fn half_period_shift_flips_sign() {
        let m = modulus(0.6);
        let quarter = complete_elliptic_k(m).unwrap();
        for u in [0.1, 0.9, 1.7] {
            let a = jacobi_sn_cn_dn(u, m).unwrap();
            let b = jacobi_sn_cn_dn(u + 2.0 * quarter, m).unwrap();
            assert!((a.sn + b.sn).abs() < 1e-13);
            assert!((a.cn + b.cn).abs() < 1e-13);
            assert!((a.dn - b.dn).abs() < 1e-13);
        }
    }

    #[test]
    fn large_arguments_stay_on_period() {
        let m = modulus(0.5);
        let quarter = complete_elliptic_k(m).unwrap();
        let base = jacobi_sn_cn_dn(0.4, m).unwrap().sn;
        let far = jacobi_sn_cn_dn(0.4 + 4.0 * quarter * 1000.0, m).unwrap().sn;
        assert!((base - far).abs() < 1e-10);
    }
}
