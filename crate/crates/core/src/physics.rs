//! Two surface gravity waves forcing an acoustic mode in an ocean of depth
//! `h`.
//!
//! With gravity-wave frequency `ω` and sound speed `c` the evolution
//! equations are a triad with
//!
//! ```text
//! wave 1 (acoustic): δ₁ = 2ω/c,  α₁ = −c²δ₁/(2ωh),  γ₁ = −2ω/(hc)
//! waves 2, 3 (gravity): δ = ω/c,  α = 0,           γ  = 2ω³/(gc)
//! ```
//!
//! resonant when `ω = √(g/(2h))`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::triad::{
    build_closed_form, ClosedFormSolution, FormulaVariant, InitialAmplitudes, TriadError,
    TriadParameters,
};

/// Default relative tolerance on the coupling sum.
pub const DEFAULT_RESONANCE_RTOL: f64 = 1e-6;
pub const DEFAULT_SOUND_SPEED: f64 = 1500.0;
pub const DEFAULT_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("{name} must be positive and finite, got {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error(
        "off resonance: gamma sum {residual:e} exceeds {rtol:e} relative; \
         the resonant frequency for this depth is omega = {suggested_omega}"
    )]
    OffResonance {
        residual: f64,
        rtol: f64,
        suggested_omega: f64,
    },
    #[error(transparent)]
    Triad(#[from] TriadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OceanParameters {
    /// Sound speed, m/s.
    pub c: f64,
    /// Gravity-wave frequency, rad/s.
    pub omega: f64,
    /// Water depth, m.
    pub h: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
}

impl OceanParameters {
    pub fn new(c: f64, omega: f64, h: f64, g: f64) -> Result<Self, PhysicsError> {
        for (name, value) in [("c", c), ("omega", omega), ("h", h), ("g", g)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PhysicsError::Parameter { name, value });
            }
        }
        Ok(Self { c, omega, h, g })
    }

    /// Default sound speed and gravity at the resonant frequency for `h`.
    pub fn resonant(h: f64) -> Result<Self, PhysicsError> {
        Self::new(
            DEFAULT_SOUND_SPEED,
            resonant_frequency(h, DEFAULT_GRAVITY),
            h,
            DEFAULT_GRAVITY,
        )
    }

    /// `(γ₁, γ₂, γ₃)` read off the evolution equations, before any
    /// adjustment.
    pub fn raw_gamma(&self) -> [f64; 3] {
        let Self { c, omega, h, g } = *self;
        let gravity = 2.0 * omega.powi(3) / (g * c);
        [-2.0 * omega / (h * c), gravity, gravity]
    }
}

/// `ω = √(g/(2h))`, independent of the sound speed.
pub fn resonant_frequency(h: f64, g: f64) -> f64 {
    (g / (2.0 * h)).sqrt()
}

/// Triad coefficients for an ocean, with the resonance adjustment applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriadMapping {
    pub params: TriadParameters,
    /// Coupling sum before the adjustment.
    pub residual: f64,
    /// Coefficients before the adjustment.
    pub raw_gamma: [f64; 3],
}

/// Maps an ocean to triad coefficients. A coupling sum within
/// `rtol·max|γⱼ|` is removed by subtracting a third of it from each
/// coefficient.
pub fn map_to_triad(ocean: &OceanParameters, rtol: f64) -> Result<TriadMapping, PhysicsError> {
    let raw_gamma = ocean.raw_gamma();
    let residual: f64 = raw_gamma.iter().sum();
    let scale = raw_gamma.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    if residual.abs() > rtol * scale {
        return Err(PhysicsError::OffResonance {
            residual,
            rtol,
            suggested_omega: resonant_frequency(ocean.h, ocean.g),
        });
    }
    let shift = residual / 3.0;
    let gamma = raw_gamma.map(|g| g - shift);
    let delta1 = 2.0 * ocean.omega / ocean.c;
    let alpha1 = -ocean.c * ocean.c * delta1 / (2.0 * ocean.omega * ocean.h);
    let params = TriadParameters::new([alpha1, 0.0, 0.0], delta1, gamma)?;
    Ok(TriadMapping {
        params,
        residual,
        raw_gamma,
    })
}

/// Closed form in ocean variables, with the printed coefficients alongside
/// the ones the general construction produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApplicationSolution {
    pub mapping: TriadMapping,
    pub solution: ClosedFormSolution,
    /// Printed rate coefficient `2√(2/(gh))·ω²/c`.
    pub printed_rate_coefficient: f64,
    /// `u_rate/|φ₀(g1)|` of the as-printed construction, `√(2|γ₁|γ₃)`.
    pub as_printed_rate_coefficient: f64,
    /// Printed acoustic prefactor `2g/(ωh)` multiplying `|φ₀(g2)|²sn²`.
    pub printed_acoustic_prefactor: f64,
    /// `−2γ₁/γ₃ = 2g/(ω²h)`, the as-printed construction's prefactor.
    pub general_acoustic_prefactor: f64,
    /// Prefactor of the solution actually built, `−2γ₁P/|φ₀(g2)|²`.
    pub constructed_acoustic_prefactor: f64,
}

/// Acoustic wave idle, gravity waves seeded with `φ₀(g1)` and `φ₀(g2)`.
pub fn application_solution(
    ocean: &OceanParameters,
    phi0_g1: Complex64,
    phi0_g2: Complex64,
    variant: FormulaVariant,
    rtol: f64,
) -> Result<ApplicationSolution, PhysicsError> {
    let mapping = map_to_triad(ocean, rtol)?;
    let init = InitialAmplitudes::with_idle_first(phi0_g1, phi0_g2)?;
    let solution = build_closed_form(mapping.params, init, variant)?;
    let [g1, _, g3] = mapping.params.gamma();
    let OceanParameters { c, omega, h, g } = *ocean;
    Ok(ApplicationSolution {
        mapping,
        solution,
        printed_rate_coefficient: 2.0 * (2.0 / (g * h)).sqrt() * omega * omega / c,
        as_printed_rate_coefficient: (2.0 * g1.abs() * g3).sqrt(),
        printed_acoustic_prefactor: 2.0 * g / (omega * h),
        general_acoustic_prefactor: -2.0 * g1 / g3,
        constructed_acoustic_prefactor: -2.0 * g1 * solution.pole_shift() / phi0_g2.norm_sqr(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn resonant_frequency_examples() {
        assert_eq!(resonant_frequency(1.0, 2.0), 1.0);
        let w = resonant_frequency(4000.0, 9.81);
        assert!((w - 0.035_017_852_59).abs() < 1e-11);
        let gamma = OceanParameters::new(1500.0, w, 4000.0, 9.81).unwrap().raw_gamma();
        assert!(gamma.iter().sum::<f64>().abs() <= 1e-15 * gamma[1]);
        let ratio = resonant_frequency(8000.0, 9.81) / w;
        assert!((ratio - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn carriers_halve_for_any_frequency() {
        for omega in [0.01, 0.035, 0.3, 2.0] {
            let h = 9.81 / (2.0 * omega * omega);
            let ocean = OceanParameters::new(1500.0, omega, h, 9.81).unwrap();
            let p = map_to_triad(&ocean, DEFAULT_RESONANCE_RTOL).unwrap().params;
            assert_eq!(p.delta1(), 2.0 * omega / 1500.0);
            assert_eq!(p.delta()[1], omega / 1500.0);
            assert_eq!(p.delta()[2], p.delta()[1]);
            assert!(rel(p.alpha()[0], -1500.0 / h) < 1e-15);
            assert_eq!(&p.alpha()[1..], &[0.0, 0.0]);
        }
    }

    #[test]
    fn off_resonance_suggests_frequency() {
        let ocean = OceanParameters::new(1500.0, 0.02, 4000.0, 9.81).unwrap();
        match map_to_triad(&ocean, DEFAULT_RESONANCE_RTOL).unwrap_err() {
            PhysicsError::OffResonance {
                residual,
                suggested_omega,
                ..
            } => {
                let expected = -2.0 * 0.02 / (4000.0 * 1500.0) + 4.0 * 0.02f64.powi(3) / (9.81 * 1500.0);
                assert!(rel(residual, expected) < 1e-14);
                assert_eq!(suggested_omega, resonant_frequency(4000.0, 9.81));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn small_detuning_is_absorbed() {
        let w = resonant_frequency(4000.0, 9.81) * (1.0 + 1e-8);
        let ocean = OceanParameters::new(1500.0, w, 4000.0, 9.81).unwrap();
        let m = map_to_triad(&ocean, DEFAULT_RESONANCE_RTOL).unwrap();
        assert!(m.residual != 0.0);
        let g = m.params.gamma();
        assert!((g[0] - (m.raw_gamma[0] - m.residual / 3.0)).abs() <= 1e-15 * g[1]);
        assert!(map_to_triad(&ocean, 1e-12).is_err());
    }

    #[test]
    fn random_depths_are_resonant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let h = rng.gen_range(1.0..6000.0);
            let g = rng.gen_range(1.0..30.0);
            let ocean = OceanParameters::new(1500.0, resonant_frequency(h, g), h, g).unwrap();
            let raw = ocean.raw_gamma();
            let scale = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(raw.iter().sum::<f64>().abs() <= 1e-14 * scale);
            assert!(map_to_triad(&ocean, DEFAULT_RESONANCE_RTOL).is_ok());
        }
    }

    #[test]
    fn resonance_does_not_depend_on_sound_speed() {
        let w = resonant_frequency(3000.0, 9.81);
        for c in [1400.0, 1450.0, 1500.0, 1550.0] {
            let ocean = OceanParameters::new(c, w, 3000.0, 9.81).unwrap();
            assert!(map_to_triad(&ocean, 1e-12).is_ok());
        }
    }

    #[test]
    fn printed_modulus_and_rate() {
        let ocean = OceanParameters::resonant(4000.0).unwrap();
        for variant in FormulaVariant::ALL {
            let app = application_solution(&ocean, c(1.0), c(0.5), variant, DEFAULT_RESONANCE_RTOL).unwrap();
            assert!((app.solution.modulus().k() - 0.5).abs() < 1e-15);
        }
        let app = application_solution(&ocean, c(2.0), c(0.5), FormulaVariant::AsPrinted, DEFAULT_RESONANCE_RTOL)
            .unwrap();
        assert!(rel(app.as_printed_rate_coefficient, app.printed_rate_coefficient) <= 1e-14);
        assert!(rel(app.solution.u_rate() / 2.0, app.printed_rate_coefficient) <= 1e-14);
    }

    #[test]
    fn acoustic_prefactors() {
        let ocean = OceanParameters::resonant(4000.0).unwrap();
        let app = application_solution(&ocean, c(1.0), c(0.5), FormulaVariant::AsPrinted, DEFAULT_RESONANCE_RTOL)
            .unwrap();
        let w = ocean.omega;
        assert!((app.general_acoustic_prefactor - 4.0).abs() <= 1e-12);
        assert!(rel(app.printed_acoustic_prefactor / w, app.general_acoustic_prefactor) <= 1e-12);
        assert!(rel(app.constructed_acoustic_prefactor, app.general_acoustic_prefactor) <= 1e-12);
        let consistent = application_solution(
            &ocean,
            c(1.0),
            c(0.5),
            FormulaVariant::OracleConsistent,
            DEFAULT_RESONANCE_RTOL,
        )
        .unwrap();
        assert!((consistent.constructed_acoustic_prefactor - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn initial_intensities() {
        let ocean = OceanParameters::resonant(100.0).unwrap();
        let app = application_solution(&ocean, c(1.0), c(0.3), FormulaVariant::OracleConsistent, DEFAULT_RESONANCE_RTOL)
            .unwrap();
        let f = app.solution.amplitude_squared(0.0);
        assert_eq!([f[0].value, f[1].value, f[2].value], [0.0, 1.0, 0.09]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(OceanParameters::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(OceanParameters::new(1500.0, f64::NAN, 1.0, 1.0).is_err());
        let ocean = OceanParameters::resonant(4000.0).unwrap();
        let err = application_solution(&ocean, c(0.5), c(1.0), FormulaVariant::AsPrinted, 1e-6).unwrap_err();
        assert!(matches!(err, PhysicsError::Triad(TriadError::Modulus { .. })));
    }
}
