//! Split-step spectral solver for the full field equations
//!
//! ```text
//! ∂ₜΨⱼ = iαⱼ(∂ₓₓΨⱼ + δⱼ²Ψⱼ) + γⱼ·Nⱼ,   N = (Ψ₂Ψ₃, Ψ₁Ψ₃*, Ψ₁Ψ₂*)
//! ```
//!
//! on a periodic domain `[0, L)`. The linear part is diagonal in Fourier
//! space and is applied exactly, mode `κ` of wave `j` picking up the phase
//! `exp(iαⱼ(δⱼ² − κ²)τ)`. The coupling is advanced pointwise with one RK4
//! step of the amplitude system. Steps are composed symmetrically (Strang):
//! half linear, full nonlinear, half linear.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use thiserror::Error;

use crate::oracle::rk4_step;
use crate::triad::{InitialAmplitudes, SpatialEnvelope, TriadParameters};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("grid incompatible with the problem: {0}")]
    GridCompatibility(String),
    #[error("field blew up at x = {x} (grid index {index}), t = {t}")]
    Blowup { index: usize, x: f64, t: f64 },
}

/// Discretization of the periodic domain and the time stepping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Number of collocation points; a power of two, at least 16.
    pub n: usize,
    /// Domain length `L`, a multiple of `4π/δ₁`.
    pub length: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Emit a snapshot every this many steps; 0 keeps only the first and
    /// last states.
    pub snapshot_every: usize,
    /// Apply the 2/3-rule filter in every linear sub-step.
    pub dealias: bool,
}

impl GridSpec {
    pub fn new(n: usize, length: f64, dt: f64, t_end: f64) -> Self {
        Self {
            n,
            length,
            dt,
            t_end,
            snapshot_every: 0,
            dealias: false,
        }
    }

    /// Smallest domain on which every carrier `e^{±iδⱼx}` is periodic.
    pub fn carrier_period(delta1: f64) -> f64 {
        4.0 * PI / delta1
    }

    pub fn validate(&self, params: &TriadParameters) -> Result<(), PdeError> {
        let bad = |msg: String| Err(PdeError::GridCompatibility(msg));
        if self.n < 16 || !self.n.is_power_of_two() {
            return bad(format!("n = {} must be a power of two >= 16", self.n));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be non-negative", self.t_end));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return bad(format!("length = {} must be positive", self.length));
        }
        let periods = self.length / Self::carrier_period(params.delta1());
        let whole = periods.round();
        if whole < 1.0 || (periods - whole).abs() > 1e-9 * whole {
            return bad(format!(
                "length {} is not a multiple of 4*pi/delta1 = {} (ratio {periods})",
                self.length,
                Self::carrier_period(params.delta1())
            ));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken, `t_end / steps`.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let steps = ((self.t_end / self.dt).round() as usize).max(1);
        (steps, self.t_end / steps as f64)
    }
}

/// The three fields sampled at `x_i = i·L/n` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub length: f64,
    pub psi: [Vec<Complex64>; 3],
}

impl FieldState {
    pub fn from_fn<F>(n: usize, length: f64, t: f64, mut f: F) -> Self
    where
        F: FnMut(f64) -> [Complex64; 3],
    {
        let mut psi: [Vec<Complex64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
        for i in 0..n {
            let v = f(length * i as f64 / n as f64);
            for j in 0..3 {
                psi[j].push(v[j]);
            }
        }
        Self { t, length, psi }
    }

    /// `Ψⱼ(x, 0) = gⱼ(x)·ψ₀ⱼ`.
    pub fn separable(
        env: &SpatialEnvelope,
        params: &TriadParameters,
        init: &InitialAmplitudes,
        n: usize,
        length: f64,
    ) -> Self {
        let psi0 = init.psi0();
        Self::from_fn(n, length, 0.0, |x| {
            let g = env.eval(params, x);
            std::array::from_fn(|j| g[j] * psi0[j])
        })
    }

    pub fn n(&self) -> usize {
        self.psi[0].len()
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.length * i as f64 / self.n() as f64
    }

    /// Discrete mass `Σₓ|Ψⱼ|²Δx` of each wave.
    pub fn mass(&self) -> [f64; 3] {
        let dx = self.dx();
        std::array::from_fn(|j| self.psi[j].iter().map(|z| z.norm_sqr()).sum::<f64>() * dx)
    }

    /// Largest `|Ψⱼ(x)|` over all waves and points.
    pub fn max_abs(&self) -> f64 {
        self.psi
            .iter()
            .flat_map(|w| w.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    /// `max |Ψ − Ψ'|` over all waves and points.
    pub fn max_difference(&self, other: &FieldState) -> f64 {
        (0..3)
            .flat_map(|j| self.psi[j].iter().zip(&other.psi[j]).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }
}

/// Forward/inverse FFT plans and the wavenumber table for one grid.
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl Spectral {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let base = 2.0 * PI / length;
        // κ_m for m ∈ {0, …, n/2, −n/2+1, …, −1}.
        let wavenumbers = (0..n)
            .map(|m| {
                let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                base * signed
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumbers,
        }
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Phase factors `exp(iα(δ² − κ²)τ)` for one wave.
    fn phases(&self, alpha: f64, delta: f64, tau: f64) -> Vec<Complex64> {
        self.wavenumbers
            .iter()
            .map(|k| Complex64::from_polar(1.0, alpha * (delta * delta - k * k) * tau))
            .collect()
    }

    fn apply(&self, field: &mut [Complex64], phases: &[Complex64], dealias: bool) {
        let n = field.len();
        self.forward.process(field);
        let scale = 1.0 / n as f64;
        let cutoff = n / 3;
        for (m, (z, p)) in field.iter_mut().zip(phases).enumerate() {
            let index = if m <= n / 2 { m } else { n - m };
            *z = if dealias && index > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                *z * *p * scale
            };
        }
        self.inverse.process(field);
    }
}

/// Exact linear sub-step of length `tau` (typically `dt/2`).
pub fn linear_half_step(state: &FieldState, params: &TriadParameters, tau: f64) -> FieldState {
    let spectral = Spectral::new(state.n(), state.length);
    let (alpha, delta) = (params.alpha(), params.delta());
    let mut next = state.clone();
    for j in 0..3 {
        let phases = spectral.phases(alpha[j], delta[j], tau);
        spectral.apply(&mut next.psi[j], &phases, false);
    }
    next
}

/// Pointwise RK4 step of the coupling terms.
pub fn nonlinear_step(state: &mut FieldState, gamma: [f64; 3], dt: f64) -> Result<(), PdeError> {
    let n = state.n();
    for i in 0..n {
        let f = [state.psi[0][i], state.psi[1][i], state.psi[2][i]];
        let next = rk4_step(&f, gamma, dt);
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(PdeError::Blowup {
                index: i,
                x: state.x(i),
                t: state.t + dt,
            });
        }
        for j in 0..3 {
            state.psi[j][i] = next[j];
        }
    }
    Ok(())
}

/// Strang-split time stepper for one parameter set and grid.
pub struct Simulator {
    params: TriadParameters,
    grid: GridSpec,
    spectral: Spectral,
    steps: usize,
    dt: f64,
    half: [Vec<Complex64>; 3],
    full: [Vec<Complex64>; 3],
}

impl Simulator {
    pub fn new(params: TriadParameters, grid: GridSpec) -> Result<Self, PdeError> {
        grid.validate(&params)?;
        let spectral = Spectral::new(grid.n, grid.length);
        let (steps, dt) = grid.steps();
        let (alpha, delta) = (params.alpha(), params.delta());
        let half = std::array::from_fn(|j| spectral.phases(alpha[j], delta[j], 0.5 * dt));
        let full = std::array::from_fn(|j| spectral.phases(alpha[j], delta[j], dt));
        Ok(Self {
            params,
            grid,
            spectral,
            steps,
            dt,
            half,
            full,
        })
    }

    /// Step actually taken (`t_end` divided evenly).
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn linear(&self, state: &mut FieldState, phases: &[Vec<Complex64>; 3]) {
        for j in 0..3 {
            self.spectral.apply(&mut state.psi[j], &phases[j], self.grid.dealias);
        }
    }

    /// Advances one full Strang step.
    pub fn step(&self, state: &mut FieldState) -> Result<(), PdeError> {
        self.linear(state, &self.half);
        nonlinear_step(state, self.params.gamma(), self.dt)?;
        self.linear(state, &self.half);
        state.t += self.dt;
        Ok(())
    }

    /// Runs to `t_end`, returning the initial state, every scheduled
    /// snapshot and the final state. Consecutive linear half steps between
    /// snapshots are fused into one full linear step.
    pub fn run(&self, initial: &FieldState) -> Result<Vec<FieldState>, PdeError> {
        if initial.n() != self.grid.n || initial.psi.iter().any(|w| w.len() != self.grid.n) {
            return Err(PdeError::GridCompatibility(format!(
                "initial state has {} points, grid has {}",
                initial.n(),
                self.grid.n
            )));
        }
        if initial.length != self.grid.length {
            return Err(PdeError::GridCompatibility(format!(
                "initial state length {} differs from grid length {}",
                initial.length, self.grid.length
            )));
        }
        let mut snapshots = vec![initial.clone()];
        if self.steps == 0 {
            return Ok(snapshots);
        }
        let t0 = initial.t;
        let gamma = self.params.gamma();
        let mut state = initial.clone();
        self.linear(&mut state, &self.half);
        for i in 1..=self.steps {
            nonlinear_step(&mut state, gamma, self.dt)?;
            let last = i == self.steps;
            let emit = last || (self.grid.snapshot_every > 0 && i % self.grid.snapshot_every == 0);
            if emit {
                self.linear(&mut state, &self.half);
                state.t = t0 + i as f64 * self.dt;
                snapshots.push(state.clone());
                if !last {
                    self.linear(&mut state, &self.half);
                }
            } else {
                self.linear(&mut state, &self.full);
                state.t = t0 + i as f64 * self.dt;
            }
        }
        Ok(snapshots)
    }
}

/// Runs the simulation described by `grid` from `initial`.
pub fn simulate(
    initial: &FieldState,
    params: &TriadParameters,
    grid: &GridSpec,
) -> Result<Vec<FieldState>, PdeError> {
    Simulator::new(*params, *grid)?.run(initial)
}

/// Largest `||Ψⱼ(x,t)|² − |gⱼ(x)|²·Iⱼ(t)|` over snapshots, points and waves,
/// relative to the peak of `|gⱼ|²Iⱼ`. `intensities[s]` holds the reference
/// `Iⱼ` at the time of snapshot `s`.
pub fn separable_deviation(
    snapshots: &[FieldState],
    env: &SpatialEnvelope,
    params: &TriadParameters,
    intensities: &[[f64; 3]],
) -> f64 {
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for (snap, reference) in snapshots.iter().zip(intensities) {
        for i in 0..snap.n() {
            let g = env.eval(params, snap.x(i));
            for j in 0..3 {
                let expected = g[j].norm_sqr() * reference[j];
                peak = peak.max(expected);
                worst = worst.max((snap.psi[j][i].norm_sqr() - expected).abs());
            }
        }
    }
    if peak > 0.0 {
        worst / peak
    } else {
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceStatus {
    /// Errors decrease monotonically; an order estimate is available.
    Converging,
    /// Errors do not decrease monotonically.
    NonMonotone,
    /// All errors are at the round-off floor.
    RoundOff,
}

/// Errors under successive step halving and the observed orders.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log₂(eᵢ/eᵢ₊₁)` for each consecutive pair.
    pub orders: Vec<f64>,
    /// Order from the finest pair, when the sequence is converging.
    pub estimate: Option<f64>,
    pub status: ConvergenceStatus,
}

impl ConvergenceReport {
    /// Builds a report from errors measured at step sizes that halve each
    /// time. Errors at or below `floor` count as round-off.
    pub fn from_errors(dts: Vec<f64>, errors: Vec<f64>, floor: f64) -> Self {
        let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let status = if errors.iter().all(|&e| e <= floor) {
            ConvergenceStatus::RoundOff
        } else if errors.windows(2).all(|w| w[1] < w[0]) && errors.iter().all(|&e| e > floor) {
            ConvergenceStatus::Converging
        } else {
            ConvergenceStatus::NonMonotone
        };
        let estimate = match status {
            ConvergenceStatus::Converging => orders.last().copied(),
            _ => None,
        };
        Self {
            dts,
            errors,
            orders,
            estimate,
            status,
        }
    }
}

/// Self-convergence in time: runs at `dt, dt/2, …` (`refinements` runs) and
/// measures the max-norm difference between consecutive final states.
pub fn convergence_study(
    initial: &FieldState,
    params: &TriadParameters,
    grid: &GridSpec,
    refinements: usize,
) -> Result<ConvergenceReport, PdeError> {
    if refinements < 3 {
        return Err(PdeError::GridCompatibility(format!(
            "convergence study needs at least 3 refinements, got {refinements}"
        )));
    }
    let mut finals = Vec::with_capacity(refinements);
    let mut dts = Vec::with_capacity(refinements);
    for r in 0..refinements {
        let mut g = *grid;
        g.dt = grid.dt / (1u64 << r) as f64;
        g.snapshot_every = 0;
        let sim = Simulator::new(*params, g)?;
        dts.push(sim.dt());
        let mut out = sim.run(initial)?;
        finals.push(out.pop().expect("run returns at least the initial state"));
    }
    let errors: Vec<f64> = finals.windows(2).map(|w| w[0].max_difference(&w[1])).collect();
    let scale = finals.last().map(FieldState::max_abs).unwrap_or(1.0).max(1.0);
    let floor = 1e-13 * scale;
    Ok(ConvergenceReport::from_errors(dts[..dts.len() - 1].to_vec(), errors, floor))
}
