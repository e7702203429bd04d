//! CSV and JSON writers. Every float is printed with 17 significant digits
//! so that it parses back to the same bits.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::oracle::AmplitudeTrajectory;
use crate::pde::FieldState;

/// Formats `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Float that serializes to JSON with 17 significant digits, or `null` when
/// not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exact(pub f64);

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format_float(self.0)).map_err(serde::ser::Error::custom)?;
            raw.serialize(serializer)
        } else {
            serializer.serialize_none()
        }
    }
}

pub fn exact_vec(values: &[f64]) -> Vec<Exact> {
    values.iter().copied().map(Exact).collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types always serialize");
    text.push('\n');
    text
}

/// Rows of floats under a header.
pub fn csv<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for &x in row.as_ref() {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format_float(x));
        }
        out.push('\n');
    }
    out
}

pub const TRAJECTORY_HEADER: &str = "t,re_f1,im_f1,re_f2,im_f2,re_f3,im_f3,H_re,H_im";
pub const SNAPSHOT_HEADER: &str = "x,re_psi1,im_psi1,re_psi2,im_psi2,re_psi3,im_psi3";
pub const INTENSITY_HEADER: &str = "t,f1_sq,f2_sq,f3_sq,nonphysical";

pub fn trajectory_csv(traj: &AmplitudeTrajectory) -> String {
    let rows = traj.samples.iter().enumerate().map(|(i, s)| {
        let [f1, f2, f3] = s.f;
        [
            s.t,
            f1.re,
            f1.im,
            f2.re,
            f2.im,
            f3.re,
            f3.im,
            traj.hamiltonian_re[i],
            traj.hamiltonian_im[i],
        ]
    });
    csv(TRAJECTORY_HEADER, rows)
}

pub fn snapshot_csv(state: &FieldState) -> String {
    let rows = (0..state.n()).map(|i| {
        let [p1, p2, p3] = [state.psi[0][i], state.psi[1][i], state.psi[2][i]];
        [state.x(i), p1.re, p1.im, p2.re, p2.im, p3.re, p3.im]
    });
    csv(SNAPSHOT_HEADER, rows)
}

/// Index of snapshot files written by a simulation.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub times: Vec<Exact>,
    pub files: Vec<String>,
}

/// Resolves output file names from a common prefix.
#[derive(Debug, Clone)]
pub struct OutputPrefix(PathBuf);

impl OutputPrefix {
    pub fn new(prefix: impl Into<PathBuf>) -> Self {
        Self(prefix.into())
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        let mut name = self.0.clone().into_os_string();
        name.push(suffix);
        PathBuf::from(name)
    }

    pub fn file_name(&self, suffix: &str) -> String {
        self.path(suffix)
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn write(&self, suffix: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.path(suffix);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, contents)?;
        Ok(path)
    }
}

impl AsRef<Path> for OutputPrefix {
    fn as_ref(&self) -> &Path {
        &self.0
    }
}

/// `.snap_00042.csv`.
pub fn snapshot_suffix(index: usize) -> String {
    format!(".snap_{index:05}.csv")
}
