//! Artifact writers. Every file is a pure function of its inputs so repeated
//! runs are byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use lsnet::lsm::{LatentState, Positions};
use lsnet::{Error, Result};
use serde::{Deserialize, Serialize};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

pub fn write_text(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::Io { path, source: e })
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    write_text(dir, name, &body)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Config(format!(
            "{} is not a valid fit artifact ({e}); rerun fit-mle or fit-mcmc",
            path.display()
        ))
    })
}

/// Latent coordinates with their node labels, as written by the fit
/// commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionsFile {
    /// `mcmc` or `mle`.
    pub source: String,
    pub labels: Vec<String>,
    pub dim: usize,
    /// Posterior mean (aligned) for sampled fits, the MLE otherwise.
    pub positions: Vec<Vec<f64>>,
    pub mle: Vec<Vec<f64>>,
    /// Minimum Kullback-Leibler configuration of a sampled fit.
    pub plug_in: Option<Vec<Vec<f64>>>,
    pub beta0: f64,
    pub coefficients: BTreeMap<String, f64>,
}

impl PositionsFile {
    pub fn new(
        source: &str,
        labels: &[String],
        primary: &LatentState,
        names: &[String],
        mle: &Positions,
        plug_in: Option<&Positions>,
    ) -> Self {
        Self {
            source: source.into(),
            labels: labels.to_vec(),
            dim: primary.positions.dim(),
            positions: primary.positions.rows(),
            mle: mle.rows(),
            plug_in: plug_in.map(Positions::rows),
            beta0: primary.beta0,
            coefficients: names.iter().cloned().zip(primary.beta.iter().copied()).collect(),
        }
    }

    /// Positions used as the distance response or clustering input:
    /// `posterior` (default) or `mle`.
    pub fn select(&self, which: &str) -> Result<Positions> {
        let rows = match which {
            "posterior" | "primary" => &self.positions,
            "mle" => &self.mle,
            other => return Err(Error::Config(format!("unknown response positions `{other}`"))),
        };
        Positions::from_rows(rows)
    }
}

/// `label,group` with groups numbered from 1.
pub fn partition_csv(labels: &[String], groups: &[usize]) -> String {
    let mut out = String::from("label,group\n");
    for (l, g) in labels.iter().zip(groups) {
        writeln!(out, "{l},{}", g + 1).expect("string write");
    }
    out
}

/// `label,p_1..p_G,group` with the most probable group numbered from 1.
pub fn memberships_csv(labels: &[String], memberships: &[Vec<f64>], map: &[usize]) -> String {
    let g = memberships.first().map_or(0, Vec::len);
    let mut out = String::from("label");
    for k in 1..=g {
        write!(out, ",p_{k}").expect("string write");
    }
    out.push_str(",group\n");
    for ((l, row), m) in labels.iter().zip(memberships).zip(map) {
        out.push_str(l);
        for p in row {
            write!(out, ",{p}").expect("string write");
        }
        writeln!(out, ",{}", m + 1).expect("string write");
    }
    out
}
