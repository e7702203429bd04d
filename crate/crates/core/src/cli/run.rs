//! Command execution. Each command writes its artifacts next to a
//! `<prefix>.report.json` whose `pass` field decides the exit status.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::config::{Command, ConfigError, RunConfig};
use super::output::{
    csv, exact_vec, snapshot_csv, snapshot_suffix, to_json, trajectory_csv, Exact, Manifest,
    OutputPrefix, INTENSITY_HEADER,
};
use crate::elliptic::{complete_elliptic_k, jacobi_sn_cn_dn, EllipticError, EllipticModulus};
use crate::oracle::{
    integrate_at, manley_rowe_invariants, measure_period, uniform_times, AmplitudeTrajectory,
    OracleError,
};
use crate::pde::{
    convergence_study, separable_deviation, FieldState, GridSpec, PdeError, Simulator,
};
use crate::physics::{
    application_solution, resonant_frequency, OceanParameters, PhysicsError,
    DEFAULT_RESONANCE_RTOL,
};
use crate::triad::{
    build_closed_form, ClosedFormSolution, FormulaVariant, InitialAmplitudes, SpatialEnvelope,
    TriadError, TriadParameters,
};

/// Thresholds applied by `verify`.
pub const AMPLITUDE_RTOL: f64 = 1e-8;
pub const PERIOD_RTOL: f64 = 1e-6;
pub const HAMILTONIAN_RTOL: f64 = 1e-9;
pub const MANLEY_ROWE_RTOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const PERIODICITY_TOL: f64 = 1e-10;
pub const PDE_RTOL: f64 = 1e-6;

/// Integrator tolerance `verify` uses unless `tol` is set.
pub const VERIFY_TOL: f64 = 1e-12;
const DEFAULT_SAMPLES: usize = 201;
const VERIFY_SAMPLES: usize = 200;
const IDENTITY_POINTS: usize = 1000;
const CONVERGENCE_REFINEMENTS: usize = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Triad(#[from] TriadError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// What a finished command reports back to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    /// 0 when the report passed, 1 when it ran but failed a tolerance.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

struct Writer {
    prefix: OutputPrefix,
    files: Vec<PathBuf>,
}

impl Writer {
    fn write(&mut self, suffix: &str, contents: &str) -> Result<(), RunError> {
        let path = self
            .prefix
            .write(suffix, contents)
            .map_err(|source| RunError::Io {
                path: self.prefix.path(suffix),
                source,
            })?;
        self.files.push(path);
        Ok(())
    }

    fn report<T: Serialize>(&mut self, report: &T) -> Result<(), RunError> {
        self.write(".report.json", &to_json(report))
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    command: &'a str,
    pass: bool,
    error: String,
}

/// Runs `config`, writing outputs under `prefix`. Errors are written to the
/// report before being returned.
pub fn run(config: &RunConfig, prefix: &OutputPrefix) -> Result<Outcome, RunError> {
    let mut out = Writer {
        prefix: prefix.clone(),
        files: Vec::new(),
    };
    let result = match config.command {
        Command::ClosedForm => closed_form(config, &mut out),
        Command::Integrate => integrate(config, &mut out),
        Command::Simulate => simulate(config, &mut out),
        Command::Verify => verify(config, &mut out),
        Command::AcousticGravity => acoustic_gravity(config, &mut out),
        Command::Convergence => convergence(config, &mut out),
    };
    match result {
        Ok(pass) => Ok(Outcome {
            pass,
            files: out.files,
        }),
        Err(err) => {
            write_error(config.command, prefix, &err.to_string());
            Err(err)
        }
    }
}

/// Best-effort error report; used also when the config itself is invalid.
pub fn write_error(command: Command, prefix: &OutputPrefix, message: &str) {
    let report = ErrorReport {
        command: command.as_str(),
        pass: false,
        error: message.to_string(),
    };
    let _ = prefix.write(".report.json", &to_json(&report));
}

/// `count` equally spaced times on `[0, t_end]`; none for zero, `[0]` for
/// one.
fn sample_times(t_end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        n => uniform_times(t_end, n),
    }
}

fn intensity_rows(sol: &ClosedFormSolution, times: &[f64]) -> Vec<[f64; 5]> {
    times
        .iter()
        .map(|&t| {
            let [a, b, c] = sol.amplitude_squared(t);
            let flag = a.nonphysical || b.nonphysical || c.nonphysical;
            [t, a.value, b.value, c.value, if flag { 1.0 } else { 0.0 }]
        })
        .collect()
}

#[derive(Serialize)]
struct SolutionSummary {
    variant: FormulaVariant,
    k: Exact,
    quarter_period: Exact,
    u_rate: Exact,
    period: Exact,
    pole_shift: Exact,
}

impl From<&ClosedFormSolution> for SolutionSummary {
    fn from(sol: &ClosedFormSolution) -> Self {
        Self {
            variant: sol.variant(),
            k: Exact(sol.modulus().k()),
            quarter_period: Exact(sol.quarter_period()),
            u_rate: Exact(sol.u_rate()),
            period: Exact(sol.period()),
            pole_shift: Exact(sol.pole_shift()),
        }
    }
}

#[derive(Serialize)]
struct ClosedFormReport {
    command: &'static str,
    solution: SolutionSummary,
    samples: usize,
    nonphysical_samples: usize,
    pass: bool,
}

fn closed_form(config: &RunConfig, out: &mut Writer) -> Result<bool, RunError> {
    let sol = build_closed_form(
        config.triad_parameters()?,
        config.initial_amplitudes()?,
        config.variant(),
    )?;
    let times = sample_times(config.t_end()?, config.sample_count(DEFAULT_SAMPLES));
    let rows = intensity_rows(&sol, &times);
    out.write(".csv", &csv(INTENSITY_HEADER, &rows))?;
    out.report(&ClosedFormReport {
        command: "closed-form",
        solution: (&sol).into(),
        samples: rows.len(),
        nonphysical_samples: rows.iter().filter(|r| r[4] != 0.0).count(),
        pass: true,
    })?;
    Ok(true)
}

#[derive(Serialize)]
struct IntegrateReport {
    command: &'static str,
    samples: usize,
    tol: Exact,
    hamiltonian_drift: Exact,
    manley_rowe_drift: Exact,
    pass: bool,
}

/// `max|Im H − Im H(0)|` relative to `max|f|³`.
fn hamiltonian_drift(traj: &AmplitudeTrajectory) -> f64 {
    let scale = traj.max_amplitude().powi(3);
    if scale > 0.0 {
        traj.hamiltonian_im_drift() / scale
    } else {
        0.0
    }
}

fn integrate(config: &RunConfig, out: &mut Writer) -> Result<bool, RunError> {
    let params = config.triad_parameters()?;
    let init = config.initial_amplitudes()?;
    let tol = config.tol()?;
    let times = sample_times(config.t_end()?, config.sample_count(DEFAULT_SAMPLES));
    let traj = integrate_at(&init, params.gamma(), &times, tol)?;
    out.write(".trajectory.csv", &trajectory_csv(&traj))?;
    out.report(&IntegrateReport {
        command: "integrate",
        samples: traj.samples.len(),
        tol: Exact(tol),
        hamiltonian_drift: Exact(hamiltonian_drift(&traj)),
        manley_rowe_drift: Exact(manley_rowe_invariants(&traj, params.gamma()).worst_relative()),
        pass: true,
    })?;
    Ok(true)
}

fn separable_initial(params: &TriadParameters, init: &InitialAmplitudes, grid: &GridSpec) -> FieldState {
    FieldState::separable(&SpatialEnvelope::carrier(), params, init, grid.n, grid.length)
}

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    steps: usize,
    dt: Exact,
    snapshots: usize,
    mass_initial: Vec<Exact>,
    mass_final: Vec<Exact>,
    pass: bool,
}

fn simulate(config: &RunConfig, out: &mut Writer) -> Result<bool, RunError> {
    let params = config.triad_parameters()?;
    let init = config.initial_amplitudes()?;
    let grid = config.grid()?;
    let sim = Simulator::new(params, grid)?;
    let initial = separable_initial(&params, &init, &grid);
    let snaps = sim.run(&initial)?;
    let mut files = Vec::with_capacity(snaps.len());
    for (i, snap) in snaps.iter().enumerate() {
        let suffix = snapshot_suffix(i);
        out.write(&suffix, &snapshot_csv(snap))?;
        files.push(out.prefix.file_name(&suffix));
    }
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    out.write(
        ".manifest.json",
        &to_json(&Manifest {
            times: exact_vec(&times),
            files,
        }),
    )?;
    let last = snaps.last().unwrap_or(&initial);
    out.report(&SimulateReport {
        command: "simulate",
        steps: sim.steps(),
        dt: Exact(sim.dt()),
        snapshots: snaps.len(),
        mass_initial: exact_vec(&initial.mass()),
        mass_final: exact_vec(&last.mass()),
        pass: true,
    })?;
    Ok(true)
}

/// Adjudication of the closed form against the integrator.
#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    pub variant: FormulaVariant,
    pub max_rel_amp_err: Exact,
    pub measured_period: Exact,
    pub predicted_period_as_printed: Exact,
    pub predicted_period_oracle_consistent: Exact,
    /// Measured period over the as-printed prediction.
    pub period_ratio: Exact,
    pub hamiltonian_drift: Exact,
    pub manley_rowe_drift: Exact,
    pub elliptic_identity_err: Exact,
    pub elliptic_periodicity_err: Exact,
    pub pde_max_rel_err: Option<Exact>,
    pub pass: bool,
}

/// Largest `|sn² + cn² − 1|` or `|dn² + k²sn² − 1|`, and largest
/// `|sn(u + 4K) − sn(u)|`, over seeded random points.
fn elliptic_errors(seed: u64) -> Result<(f64, f64), RunError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut identity = 0.0f64;
    let mut periodicity = 0.0f64;
    for _ in 0..IDENTITY_POINTS {
        let k: f64 = rng.gen_range(0.0..0.99);
        let u: f64 = rng.gen_range(-20.0..20.0);
        let m = EllipticModulus::new(k)?;
        let j = jacobi_sn_cn_dn(u, m)?;
        let shifted = jacobi_sn_cn_dn(u + 4.0 * complete_elliptic_k(m)?, m)?;
        identity = identity
            .max((j.sn * j.sn + j.cn * j.cn - 1.0).abs())
            .max((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs());
        periodicity = periodicity.max((shifted.sn - j.sn).abs());
    }
    Ok((identity, periodicity))
}

/// Runs the adjudication without writing anything.
pub fn verify_report(config: &RunConfig) -> Result<VerifyReport, RunError> {
    let params = config.triad_parameters()?;
    let init = config.initial_amplitudes()?;
    let variant = config.variant();
    let gamma = params.gamma();
    let tol = config.settings.tol.unwrap_or(VERIFY_TOL);
    config.tol()?;

    let chosen = build_closed_form(params, init, variant)?;
    let printed = build_closed_form(params, init, FormulaVariant::AsPrinted)?;
    let consistent = build_closed_form(params, init, FormulaVariant::OracleConsistent)?;

    let times = uniform_times(chosen.period(), config.sample_count(VERIFY_SAMPLES));
    let short = integrate_at(&init, gamma, &times, tol)?;
    let norms = short.norms_sqr();
    let peaks: [f64; 3] = std::array::from_fn(|j| norms.iter().map(|n| n[j]).fold(0.0, f64::max));
    let mut amp_err = 0.0f64;
    for (&t, oracle) in times.iter().zip(&norms) {
        let closed = chosen.amplitude_squared(t);
        for j in 0..3 {
            if peaks[j] > 0.0 {
                amp_err = amp_err.max((closed[j].value - oracle[j]).abs() / peaks[j]);
            }
        }
    }

    let longest = printed.period().max(consistent.period());
    let span = 5.2 * longest;
    let samples = ((span / longest) * 1000.0).ceil() as usize + 1;
    let long = integrate_at(&init, gamma, &uniform_times(span, samples), tol)?;
    let measured = measure_period(&long)?.period;
    let ham = hamiltonian_drift(&long);
    let mr = manley_rowe_invariants(&long, gamma).worst_relative();
    let (identity, periodicity) = elliptic_errors(config.seed())?;

    let pde = if config.settings.n.is_some() || config.settings.length.is_some() {
        let mut grid = config.grid()?;
        if grid.t_end == 0.0 {
            grid.t_end = chosen.period();
        }
        if grid.snapshot_every == 0 {
            grid.snapshot_every = (grid.steps().0 / 20).max(1);
        }
        let sim = Simulator::new(params, grid)?;
        let snaps = sim.run(&separable_initial(&params, &init, &grid))?;
        let snap_times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
        let reference = integrate_at(&init, gamma, &snap_times, tol)?.norms_sqr();
        Some(separable_deviation(
            &snaps,
            &SpatialEnvelope::carrier(),
            &params,
            &reference,
        ))
    } else {
        None
    };

    let period_err = ((measured - chosen.period()) / chosen.period()).abs();
    let pass = amp_err <= AMPLITUDE_RTOL
        && period_err <= PERIOD_RTOL
        && ham <= HAMILTONIAN_RTOL
        && mr <= MANLEY_ROWE_RTOL
        && identity <= IDENTITY_TOL
        && periodicity <= PERIODICITY_TOL
        && pde.map_or(true, |e| e <= PDE_RTOL);
    Ok(VerifyReport {
        command: "verify",
        variant,
        max_rel_amp_err: Exact(amp_err),
        measured_period: Exact(measured),
        predicted_period_as_printed: Exact(printed.period()),
        predicted_period_oracle_consistent: Exact(consistent.period()),
        period_ratio: Exact(measured / printed.period()),
        hamiltonian_drift: Exact(ham),
        manley_rowe_drift: Exact(mr),
        elliptic_identity_err: Exact(identity),
        elliptic_periodicity_err: Exact(periodicity),
        pde_max_rel_err: pde.map(Exact),
        pass,
    })
}

fn verify(config: &RunConfig, out: &mut Writer) -> Result<bool, RunError> {
    let report = verify_report(config)?;
    out.report(&report)?;
    Ok(report.pass)
}

#[derive(Serialize)]
struct AcousticReport {
    command: &'static str,
    c: Exact,
    omega: Exact,
    h: Exact,
    g: Exact,
    resonant_omega: Exact,
    resonance_residual: Exact,
    raw_gamma: Vec<Exact>,
    gamma: Vec<Exact>,
    alpha: Vec<Exact>,
    delta: Vec<Exact>,
    solution: SolutionSummary,
    printed_rate_coefficient: Exact,
    as_printed_rate_coefficient: Exact,
    printed_acoustic_prefactor: Exact,
    general_acoustic_prefactor: Exact,
    constructed_acoustic_prefactor: Exact,
    pass: bool,
}

fn acoustic_gravity(config: &RunConfig, out: &mut Writer) -> Result<bool, RunError> {
    let (c, omega, h, g, phi1, phi2) = config.ocean_inputs()?;
    let omega = omega.unwrap_or_else(|| resonant_frequency(h, g));
    let ocean = OceanParameters::new(c, omega, h, g)?;
    let app = application_solution(
        &ocean,
        Complex64::new(phi1, 0.0),
        Complex64::new(phi2, 0.0),
        config.variant(),
        DEFAULT_RESONANCE_RTOL,
    )?;
    let sol = &app.solution;
    let t_end = config.settings.t_end.unwrap_or(sol.period());
    let times = sample_times(t_end, config.sample_count(DEFAULT_SAMPLES));
    out.write(".csv", &csv(INTENSITY_HEADER, intensity_rows(sol, &times)))?;
    let p = app.mapping.params;
    out.report(&AcousticReport {
        command: "acoustic-gravity",
        c: Exact(c),
        omega: Exact(omega),
        h: Exact(h),
        g: Exact(g),
        resonant_omega: Exact(resonant_frequency(h, g)),
        resonance_residual: Exact(app.mapping.residual),
        raw_gamma: exact_vec(&app.mapping.raw_gamma),
        gamma: exact_vec(&p.gamma()),
        alpha: exact_vec(&p.alpha()),
        delta: exact_vec(&p.delta()),
        solution: sol.into(),
        printed_rate_coefficient: Exact(app.printed_rate_coefficient),
        as_printed_rate_coefficient: Exact(app.as_printed_rate_coefficient),
        printed_acoustic_prefactor: Exact(app.printed_acoustic_prefactor),
        general_acoustic_prefactor: Exact(app.general_acoustic_prefactor),
        constructed_acoustic_prefactor: Exact(app.constructed_acoustic_prefactor),
        pass: true,
    })?;
    Ok(true)
}

#[derive(Serialize)]
struct ConvergenceOutput {
    command: &'static str,
    dts: Vec<Exact>,
    errors: Vec<Exact>,
    orders: Vec<Exact>,
    estimate: Option<Exact>,
    status: crate::pde::ConvergenceStatus,
    pass: bool,
}

fn convergence(config: &RunConfig, out: &mut Writer) -> Result<bool, RunError> {
    let params = config.triad_parameters()?;
    let init = config.initial_amplitudes()?;
    let grid = config.grid()?;
    let initial = separable_initial(&params, &init, &grid);
    let report = convergence_study(&initial, &params, &grid, CONVERGENCE_REFINEMENTS)?;
    let pass = report.estimate.is_some();
    out.report(&ConvergenceOutput {
        command: "convergence",
        dts: exact_vec(&report.dts),
        errors: exact_vec(&report.errors),
        orders: exact_vec(&report.orders),
        estimate: report.estimate.map(Exact),
        status: report.status,
        pass,
    })?;
    Ok(pass)
}
