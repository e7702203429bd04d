//! The resonant triad: coefficients, initial data, spatial envelopes and the
//! closed-form amplitude solution.
//!
//! The amplitude system
//!
//! ```text
//! f₁' = γ₁ f₂ f₃,   f₂' = γ₂ f₁ f₃*,   f₃' = γ₃ f₁ f₂*
//! ```
//!
//! with `f₁(0) = 0`, `γ₁ < 0 < γ₂, γ₃` and `γ₁ + γ₂ + γ₃ = 0` has
//! `|fⱼ|²(t) = |ψ₀ⱼ|² + 2γⱼ Z(t)` with `Z = −P·sn²(u_rate·t, k)`, where the
//! pole shift `P`, and the rate `u_rate`, depend on the [`FormulaVariant`].
//! Both variants share the modulus `k = (|ψ₀₃|/|ψ₀₂|)·√(γ₂/γ₃)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{complete_elliptic_k, sn_squared, EllipticError, EllipticModulus};

/// Relative tolerance on `γ₁ + γ₂ + γ₃ = 0`.
pub const RESONANCE_RTOL: f64 = 1e-12;

/// Relative tolerance on the envelope product relations.
pub const ENVELOPE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriadError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("carrier wavenumber delta1 must be positive, got {0}")]
    Delta(f64),
    #[error("coupling coefficients are not resonant: gamma1 + gamma2 + gamma3 = {residual:e}")]
    Resonance { residual: f64 },
    #[error("gamma{index} has the wrong sign (need gamma1 < 0 < gamma2, gamma3){hint}")]
    SignConvention { index: usize, hint: String },
    #[error("closed form requires a coupled triad (all gamma are zero)")]
    Uncoupled,
    #[error("unsupported initial condition: {0}")]
    UnsupportedInitialCondition(&'static str),
    #[error("elliptic modulus k = {k} is not below one")]
    Modulus { k: f64 },
    #[error("envelope coefficients violate {relation} (residual {residual:e})")]
    EnvelopeConsistency {
        relation: &'static str,
        residual: f64,
    },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

fn finite(name: &'static str, value: f64) -> Result<f64, TriadError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(TriadError::NonFinite { name, value })
    }
}

/// Coefficients `αⱼ`, `δⱼ`, `γⱼ` of the three coupled envelope equations.
///
/// The carriers are tied together as `δ₂ = δ₃ = δ₁/2`, and the couplings are
/// resonant with wave 1 carrying the odd sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriadParameters {
    alpha: [f64; 3],
    delta: [f64; 3],
    gamma: [f64; 3],
}

impl TriadParameters {
    pub fn new(alpha: [f64; 3], delta1: f64, gamma: [f64; 3]) -> Result<Self, TriadError> {
        let params = Self::unchecked(alpha, delta1, gamma)?;
        check_resonance(gamma)?;
        check_signs(gamma)?;
        Ok(params)
    }

    /// The linear problem with all couplings switched off.
    pub fn uncoupled(alpha: [f64; 3], delta1: f64) -> Result<Self, TriadError> {
        Self::unchecked(alpha, delta1, [0.0; 3])
    }

    fn unchecked(alpha: [f64; 3], delta1: f64, gamma: [f64; 3]) -> Result<Self, TriadError> {
        const ALPHA: [&str; 3] = ["alpha1", "alpha2", "alpha3"];
        const GAMMA: [&str; 3] = ["gamma1", "gamma2", "gamma3"];
        for j in 0..3 {
            finite(ALPHA[j], alpha[j])?;
            finite(GAMMA[j], gamma[j])?;
        }
        finite("delta1", delta1)?;
        if delta1 <= 0.0 {
            return Err(TriadError::Delta(delta1));
        }
        let half = 0.5 * delta1;
        Ok(Self {
            alpha,
            delta: [delta1, half, half],
            gamma,
        })
    }

    #[inline]
    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    #[inline]
    pub fn delta(&self) -> [f64; 3] {
        self.delta
    }

    /// `δ ≡ δ₁`.
    #[inline]
    pub fn delta1(&self) -> f64 {
        self.delta[0]
    }

    #[inline]
    pub fn gamma(&self) -> [f64; 3] {
        self.gamma
    }

    pub fn is_coupled(&self) -> bool {
        self.gamma.iter().any(|&g| g != 0.0)
    }
}

/// Builds validated [`TriadParameters`] from `α`, `δ₁` and `γ`.
pub fn build_parameters(
    alpha: [f64; 3],
    delta1: f64,
    gamma: [f64; 3],
) -> Result<TriadParameters, TriadError> {
    TriadParameters::new(alpha, delta1, gamma)
}

fn check_resonance(gamma: [f64; 3]) -> Result<(), TriadError> {
    let residual = gamma[0] + gamma[1] + gamma[2];
    let scale = gamma.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    if residual.abs() > RESONANCE_RTOL * scale {
        return Err(TriadError::Resonance { residual });
    }
    Ok(())
}

fn check_signs(gamma: [f64; 3]) -> Result<(), TriadError> {
    let offending = if gamma[0] >= 0.0 {
        1
    } else if gamma[1] <= 0.0 {
        2
    } else if gamma[2] <= 0.0 {
        3
    } else {
        return Ok(());
    };
    // If exactly one coefficient is negative, point at the relabelling that
    // would put it first.
    let negatives: Vec<usize> = (0..3).filter(|&j| gamma[j] < 0.0).collect();
    let hint = match negatives.as_slice() {
        [j] if *j != 0 => format!("; relabel waves 1 and {} so the negative coupling comes first", j + 1),
        _ => String::new(),
    };
    Err(TriadError::SignConvention {
        index: offending,
        hint,
    })
}

/// Complex seeds `ψ₀ⱼ` of the amplitude system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialAmplitudes {
    psi0: [Complex64; 3],
}

impl InitialAmplitudes {
    pub fn new(psi0: [Complex64; 3]) -> Result<Self, TriadError> {
        const NAMES: [&str; 3] = ["psi01", "psi02", "psi03"];
        for (name, z) in NAMES.iter().zip(psi0) {
            finite(name, z.re)?;
            finite(name, z.im)?;
        }
        Ok(Self { psi0 })
    }

    /// Seeds with `ψ₀₁ = 0`, the case the closed form covers.
    pub fn with_idle_first(psi02: Complex64, psi03: Complex64) -> Result<Self, TriadError> {
        Self::new([Complex64::new(0.0, 0.0), psi02, psi03])
    }

    #[inline]
    pub fn psi0(&self) -> [Complex64; 3] {
        self.psi0
    }

    /// `|ψ₀ⱼ|²` for each wave.
    pub fn norms_sqr(&self) -> [f64; 3] {
        self.psi0.map(|z| z.norm_sqr())
    }
}

/// Which set of constants to use when evaluating the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaVariant {
    /// Pole shifts `ψ₀ⱼ²/γⱼ` and `u = √(2|γ₁|γ₃)·|ψ₀₂|·t`, exactly as
    /// printed in the reference form.
    AsPrinted,
    /// Pole shifts `ψ₀ⱼ²/(2γⱼ)` and `u = √(|γ₁|γ₃)·|ψ₀₂|·t`. These are the
    /// constants that satisfy the amplitude ODEs; the integrator confirms
    /// them to better than 1e-8.
    OracleConsistent,
}

impl FormulaVariant {
    pub const ALL: [FormulaVariant; 2] = [FormulaVariant::AsPrinted, FormulaVariant::OracleConsistent];

    /// Denominator multiplier `m` in the pole shift `ψ₀ⱼ²/(m·γⱼ)`.
    fn pole_divisor(self) -> f64 {
        match self {
            FormulaVariant::AsPrinted => 1.0,
            FormulaVariant::OracleConsistent => 2.0,
        }
    }

    /// Factor under the square root of the elliptic rate.
    fn rate_factor(self) -> f64 {
        match self {
            FormulaVariant::AsPrinted => 2.0,
            FormulaVariant::OracleConsistent => 1.0,
        }
    }

    /// `c` in `|f₃|² = |ψ₀₃|²(1 − c·sn²)`.
    fn wave3_depletion(self) -> f64 {
        2.0 / self.pole_divisor()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FormulaVariant::AsPrinted => "as-printed",
            FormulaVariant::OracleConsistent => "oracle-consistent",
        }
    }
}

impl std::fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FormulaVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as-printed" => Ok(FormulaVariant::AsPrinted),
            "oracle-consistent" => Ok(FormulaVariant::OracleConsistent),
            other => Err(format!(
                "unknown variant `{other}` (expected `as-printed` or `oracle-consistent`)"
            )),
        }
    }
}

/// A real value that may be negative where a squared modulus is expected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tagged {
    pub value: f64,
    pub nonphysical: bool,
}

impl Tagged {
    fn new(value: f64) -> Self {
        Self {
            value,
            nonphysical: value < 0.0,
        }
    }
}

/// Precomputed closed-form solution. Evaluation at any `t` is O(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormSolution {
    params: TriadParameters,
    init: InitialAmplitudes,
    variant: FormulaVariant,
    k: EllipticModulus,
    u_rate: f64,
    quarter_period: f64,
    /// Pole shift of wave 3, `|ψ₀₃|²/(m·γ₃)`.
    pole_shift: f64,
}

impl ClosedFormSolution {
    pub fn new(
        params: TriadParameters,
        init: InitialAmplitudes,
        variant: FormulaVariant,
    ) -> Result<Self, TriadError> {
        if !params.is_coupled() {
            return Err(TriadError::Uncoupled);
        }
        let [psi01, psi02, psi03] = init.psi0;
        if psi01.norm_sqr() != 0.0 {
            return Err(TriadError::UnsupportedInitialCondition(
                "closed form is only derived for psi01 = 0",
            ));
        }
        let a2 = psi02.norm();
        if a2 == 0.0 {
            return Err(TriadError::UnsupportedInitialCondition(
                "closed form requires psi02 != 0",
            ));
        }
        let [g1, g2, g3] = params.gamma;
        let k = psi03.norm() / a2 * (g2 / g3).sqrt();
        if !(k < 1.0) {
            return Err(TriadError::Modulus { k });
        }
        let k = EllipticModulus::new(k)?;
        let quarter_period = complete_elliptic_k(k)?;
        let u_rate = (variant.rate_factor() * g1.abs() * g3).sqrt() * a2;
        let pole_shift = psi03.norm_sqr() / (variant.pole_divisor() * g3);
        Ok(Self {
            params,
            init,
            variant,
            k,
            u_rate,
            quarter_period,
            pole_shift,
        })
    }

    pub fn params(&self) -> &TriadParameters {
        &self.params
    }

    pub fn init(&self) -> &InitialAmplitudes {
        &self.init
    }

    pub fn variant(&self) -> FormulaVariant {
        self.variant
    }

    pub fn modulus(&self) -> EllipticModulus {
        self.k
    }

    /// Coefficient of `t` in the elliptic argument.
    pub fn u_rate(&self) -> f64 {
        self.u_rate
    }

    /// `K(k)`.
    pub fn quarter_period(&self) -> f64 {
        self.quarter_period
    }

    /// Period of every `|fⱼ|²`, `2K(k)/u_rate`.
    pub fn period(&self) -> f64 {
        2.0 * self.quarter_period / self.u_rate
    }

    /// Wave-3 pole shift used by this variant.
    pub fn pole_shift(&self) -> f64 {
        self.pole_shift
    }

    fn sn2(&self, t: f64) -> f64 {
        // The modulus is validated and u_rate is finite, so only a
        // non-finite t can fail here.
        sn_squared(self.u_rate * t, self.k).unwrap_or(f64::NAN)
    }

    /// `Z(t) = −P·sn²(u_rate·t, k) ≤ 0`.
    pub fn z(&self, t: f64) -> f64 {
        -self.pole_shift * self.sn2(t)
    }

    /// `|fⱼ|²(t)` for the three waves. Negative values are tagged rather than
    /// clamped.
    pub fn amplitude_squared(&self, t: f64) -> [Tagged; 3] {
        let s2 = self.sn2(t);
        let [g1, g2, _] = self.params.gamma;
        let [_, n2, n3] = self.init.norms_sqr();
        let drained = self.pole_shift * s2;
        [
            Tagged::new(-2.0 * g1 * drained),
            Tagged::new(n2 - 2.0 * g2 * drained),
            Tagged::new(n3 * (1.0 - self.variant.wave3_depletion() * s2)),
        ]
    }
}

/// Builds the closed form for the given coefficients and seeds.
pub fn build_closed_form(
    params: TriadParameters,
    init: InitialAmplitudes,
    variant: FormulaVariant,
) -> Result<ClosedFormSolution, TriadError> {
    ClosedFormSolution::new(params, init, variant)
}

pub fn z_of_t(sol: &ClosedFormSolution, t: f64) -> f64 {
    sol.z(t)
}

pub fn amplitude_squared(sol: &ClosedFormSolution, t: f64) -> [Tagged; 3] {
    sol.amplitude_squared(t)
}

/// Coefficients of `gⱼ(x) = aⱼe^{iδⱼx} + bⱼe^{−iδⱼx}`, constrained so that
/// `g₁ = g₂g₃` holds identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialEnvelope {
    coeff_plus: [Complex64; 3],
    coeff_minus: [Complex64; 3],
}

impl SpatialEnvelope {
    /// Validates `a₁ = a₂a₃`, `b₁ = b₂b₃` and `a₂b₃ + a₃b₂ = 0`, which
    /// together are equivalent to `g₁ = g₂g₃` when `δ₂ = δ₃ = δ₁/2`.
    pub fn new(coeff_plus: [Complex64; 3], coeff_minus: [Complex64; 3]) -> Result<Self, TriadError> {
        for z in coeff_plus.iter().chain(&coeff_minus) {
            finite("envelope coefficient", z.re)?;
            finite("envelope coefficient", z.im)?;
        }
        let [a1, a2, a3] = coeff_plus;
        let [b1, b2, b3] = coeff_minus;
        let scale = a1
            .norm()
            .max(b1.norm())
            .max((a2.norm() + b2.norm()) * (a3.norm() + b3.norm()));
        let tol = ENVELOPE_RTOL * scale;
        let checks = [
            ("a1 = a2*a3", (a1 - a2 * a3).norm()),
            ("b1 = b2*b3", (b1 - b2 * b3).norm()),
            ("a2*b3 + a3*b2 = 0", (a2 * b3 + a3 * b2).norm()),
        ];
        for (relation, residual) in checks {
            if residual > tol {
                return Err(TriadError::EnvelopeConsistency { relation, residual });
            }
        }
        Ok(Self {
            coeff_plus,
            coeff_minus,
        })
    }

    /// Pure forward carriers, `gⱼ(x) = e^{iδⱼx}`.
    pub fn carrier() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            coeff_plus: [one; 3],
            coeff_minus: [zero; 3],
        }
    }

    pub fn coeff_plus(&self) -> [Complex64; 3] {
        self.coeff_plus
    }

    pub fn coeff_minus(&self) -> [Complex64; 3] {
        self.coeff_minus
    }

    pub fn eval(&self, params: &TriadParameters, x: f64) -> [Complex64; 3] {
        let delta = params.delta();
        std::array::from_fn(|j| {
            let phase = Complex64::from_polar(1.0, delta[j] * x);
            self.coeff_plus[j] * phase + self.coeff_minus[j] * phase.conj()
        })
    }

    /// Largest `|gⱼ|` the envelope can reach, used to scale residuals.
    fn magnitude_scale(&self) -> f64 {
        (0..3)
            .map(|j| self.coeff_plus[j].norm() + self.coeff_minus[j].norm())
            .fold(0.0, f64::max)
    }

    /// Residuals of the conjugate relations `g₂ = g₁g₃*` and `g₃ = g₁g₂*`
    /// sampled over one spatial period. These are what the full field
    /// equations need for the product ansatz to be exact; they hold for
    /// unimodular single-direction carriers but not in general.
    pub fn conjugate_residuals(&self, params: &TriadParameters) -> [f64; 2] {
        let period = 4.0 * std::f64::consts::PI / params.delta1();
        let mut worst = [0.0_f64; 2];
        for i in 0..64 {
            let x = period * i as f64 / 64.0;
            let [g1, g2, g3] = self.eval(params, x);
            worst[0] = worst[0].max((g2 - g1 * g3.conj()).norm());
            worst[1] = worst[1].max((g3 - g1 * g2.conj()).norm());
        }
        worst
    }

    pub fn satisfies_conjugate_relations(&self, params: &TriadParameters) -> bool {
        let tol = ENVELOPE_RTOL * self.magnitude_scale().powi(2).max(1.0);
        self.conjugate_residuals(params).iter().all(|&r| r <= tol)
    }
}

/// `gⱼ(x)` for the three waves.
pub fn envelope_eval(env: &SpatialEnvelope, params: &TriadParameters, x: f64) -> [Complex64; 3] {
    env.eval(params, x)
}

/// Residual of `g'' + δ²g = 0` over one spatial period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmholtzReport {
    pub max_residual: f64,
    /// `max δⱼ²·|gⱼ|`, the size of each of the two cancelling terms.
    pub scale: f64,
}

/// Evaluates `g_{j,xx} + δⱼ²gⱼ` with the analytic second derivative at 64
/// points per period.
pub fn verify_helmholtz(env: &SpatialEnvelope, params: &TriadParameters) -> HelmholtzReport {
    let delta = params.delta();
    let period = 4.0 * std::f64::consts::PI / params.delta1();
    let mut report = HelmholtzReport {
        max_residual: 0.0,
        scale: 0.0,
    };
    for i in 0..64 {
        let x = period * i as f64 / 64.0;
        let g = env.eval(params, x);
        for j in 0..3 {
            let ik = Complex64::new(0.0, delta[j]);
            let phase = Complex64::from_polar(1.0, delta[j] * x);
            let second = ik * ik * env.coeff_plus[j] * phase + ik * ik * env.coeff_minus[j] * phase.conj();
            let residual = second + delta[j] * delta[j] * g[j];
            report.max_residual = report.max_residual.max(residual.norm());
            report.scale = report.scale.max(delta[j] * delta[j] * g[j].norm());
        }
    }
    report
}

/// `|Ψⱼ(x,t)|² = |gⱼ(x)|²·|fⱼ|²(t)`.
pub fn field_intensity(
    sol: &ClosedFormSolution,
    env: &SpatialEnvelope,
    x: f64,
    t: f64,
) -> [Tagged; 3] {
    let g = env.eval(sol.params(), x);
    let f = sol.amplitude_squared(t);
    std::array::from_fn(|j| Tagged::new(g[j].norm_sqr() * f[j].value))
}

/// The printed intensity form: `|fⱼ|²(t)·[e^{imδx} + e^{−imδx}]` with
/// `m = 2` for wave 1 and `m = 1` for waves 2 and 3. Can be negative.
pub fn as_printed_intensity(sol: &ClosedFormSolution, x: f64, t: f64) -> [Tagged; 3] {
    let delta = sol.params().delta1();
    let f = sol.amplitude_squared(t);
    let harmonic = [2.0, 1.0, 1.0];
    std::array::from_fn(|j| Tagged::new(2.0 * (harmonic[j] * delta * x).cos() * f[j].value))
}
