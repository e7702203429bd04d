//! Flat TOML run configuration.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::DEFAULT_TOL;
use crate::pde::GridSpec;
use crate::physics::{DEFAULT_GRAVITY, DEFAULT_SOUND_SPEED};
use crate::triad::{FormulaVariant, InitialAmplitudes, TriadError, TriadParameters};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("`{key}` is required by the {command} command")]
    Missing { key: &'static str, command: Command },
    #[error("`{key}` = {value} is invalid: {reason}")]
    Invalid {
        key: &'static str,
        value: String,
        reason: String,
    },
    #[error(transparent)]
    Triad(#[from] TriadError),
}

/// Experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ClosedForm,
    Integrate,
    Simulate,
    Verify,
    AcousticGravity,
    Convergence,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::ClosedForm,
        Command::Integrate,
        Command::Simulate,
        Command::Verify,
        Command::AcousticGravity,
        Command::Convergence,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::ClosedForm => "closed-form",
            Command::Integrate => "integrate",
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::AcousticGravity => "acoustic-gravity",
            Command::Convergence => "convergence",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// The configuration document exactly as written. Every key is optional
/// here; [`RunConfig`] decides which ones a command needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi02_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi02_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi03_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi03_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0_g1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi0_g2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<FormulaVariant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|span| line_column(text, span.start))
                .unwrap_or((1, 1));
            ConfigError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat settings always serialize")
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// A validated command plus its settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub settings: Settings,
}

/// Parses and validates `text` for `command`.
pub fn parse_config(text: &str, command: Command) -> Result<RunConfig, ConfigError> {
    let config = RunConfig {
        command,
        settings: Settings::parse(text)?,
    };
    config.validate()?;
    Ok(config)
}

fn require<T: Copy>(value: Option<T>, key: &'static str, command: Command) -> Result<T, ConfigError> {
    value.ok_or(ConfigError::Missing { key, command })
}

fn positive(value: f64, key: &'static str) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::Invalid {
            key,
            value: value.to_string(),
            reason: "must be positive and finite".into(),
        })
    }
}

impl RunConfig {
    /// Checks that every key the command needs is present and well formed.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.command {
            Command::ClosedForm | Command::Integrate => {
                self.triad_parameters()?;
                self.initial_amplitudes()?;
                self.t_end()?;
            }
            Command::Verify => {
                self.triad_parameters()?;
                self.initial_amplitudes()?;
                if self.has_grid() {
                    self.grid()?;
                }
            }
            Command::Simulate | Command::Convergence => {
                self.triad_parameters()?;
                self.initial_amplitudes()?;
                self.grid()?;
            }
            Command::AcousticGravity => {
                self.ocean_inputs()?;
            }
        }
        self.tol()?;
        Ok(())
    }

    pub fn variant(&self) -> FormulaVariant {
        self.settings.variant.unwrap_or(FormulaVariant::OracleConsistent)
    }

    pub fn seed(&self) -> u64 {
        self.settings.seed.unwrap_or(0)
    }

    pub fn tol(&self) -> Result<f64, ConfigError> {
        let tol = self.settings.tol.unwrap_or(DEFAULT_TOL);
        if (1e-13..=1e-6).contains(&tol) {
            Ok(tol)
        } else {
            Err(ConfigError::Invalid {
                key: "tol",
                value: tol.to_string(),
                reason: "must lie in [1e-13, 1e-6]".into(),
            })
        }
    }

    pub fn sample_count(&self, default: usize) -> usize {
        self.settings.sample_count.unwrap_or(default)
    }

    pub fn t_end(&self) -> Result<f64, ConfigError> {
        let t = require(self.settings.t_end, "t_end", self.command)?;
        if t >= 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(ConfigError::Invalid {
                key: "t_end",
                value: t.to_string(),
                reason: "must be non-negative and finite".into(),
            })
        }
    }

    pub fn triad_parameters(&self) -> Result<TriadParameters, ConfigError> {
        let s = &self.settings;
        let gamma = [
            require(s.gamma1, "gamma1", self.command)?,
            require(s.gamma2, "gamma2", self.command)?,
            require(s.gamma3, "gamma3", self.command)?,
        ];
        let alpha = [
            s.alpha1.unwrap_or(0.0),
            s.alpha2.unwrap_or(0.0),
            s.alpha3.unwrap_or(0.0),
        ];
        let delta1 = s.delta1.unwrap_or(1.0);
        if gamma == [0.0; 3] {
            return Ok(TriadParameters::uncoupled(alpha, delta1)?);
        }
        Ok(TriadParameters::new(alpha, delta1, gamma)?)
    }

    pub fn initial_amplitudes(&self) -> Result<InitialAmplitudes, ConfigError> {
        let s = &self.settings;
        let psi02 = Complex64::new(
            require(s.psi02_re, "psi02_re", self.command)?,
            s.psi02_im.unwrap_or(0.0),
        );
        let psi03 = Complex64::new(
            require(s.psi03_re, "psi03_re", self.command)?,
            s.psi03_im.unwrap_or(0.0),
        );
        Ok(InitialAmplitudes::with_idle_first(psi02, psi03)?)
    }

    fn has_grid(&self) -> bool {
        let s = &self.settings;
        s.n.is_some() || s.length.is_some() || s.dt.is_some()
    }

    pub fn grid(&self) -> Result<GridSpec, ConfigError> {
        let s = &self.settings;
        let n = require(s.n, "n", self.command)?;
        let length = positive(require(s.length, "length", self.command)?, "length")?;
        let dt = positive(require(s.dt, "dt", self.command)?, "dt")?;
        let t_end = match self.command {
            Command::Verify => s.t_end.unwrap_or(0.0),
            _ => self.t_end()?,
        };
        let mut grid = GridSpec::new(n, length, dt, t_end);
        grid.snapshot_every = s.snapshot_every.unwrap_or(0);
        Ok(grid)
    }

    /// `(c, ω, h, g, φ₀(g1), φ₀(g2))`; `ω` is `None` when it should be
    /// taken at resonance.
    pub fn ocean_inputs(&self) -> Result<(f64, Option<f64>, f64, f64, f64, f64), ConfigError> {
        let s = &self.settings;
        let c = positive(s.c.unwrap_or(DEFAULT_SOUND_SPEED), "c")?;
        let g = positive(s.g.unwrap_or(DEFAULT_GRAVITY), "g")?;
        let h = positive(require(s.h, "h", self.command)?, "h")?;
        let omega = s.omega.map(|w| positive(w, "omega")).transpose()?;
        let phi1 = require(s.phi0_g1, "phi0_g1", self.command)?;
        let phi2 = require(s.phi0_g2, "phi0_g2", self.command)?;
        Ok((c, omega, h, g, phi1, phi2))
    }
}
