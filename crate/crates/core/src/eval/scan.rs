use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::q_value;
use crate::error::{Error, Result};
use crate::lpcm::{mcmc_sample, BicReport, McmcConfig, Priors};
use crate::network::{DyadDesign, Network};
use crate::rng::substream_seed;
use crate::stats::{mean, quantile, std_dev};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    /// One model per candidate covariate.
    Individual,
    /// A single model with every candidate.
    Joint,
    /// One model per candidate, each also holding the control covariates.
    Controlled,
}

impl std::str::FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "individual" => Ok(Self::Individual),
            "joint" => Ok(Self::Joint),
            "controlled" => Ok(Self::Controlled),
            other => Err(Error::Config(format!("unknown scan mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub mode: ScanMode,
    /// Covariates to scan, by design column name.
    pub candidates: Vec<String>,
    /// Always-included covariates in controlled mode.
    pub control: Vec<String>,
    /// Extra seeds per model for the Monte Carlo spread of the estimates.
    pub replicates: usize,
}

/// One fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    /// Covariates in the model; empty for the baseline.
    pub covariates: Vec<String>,
    /// The covariate this row is about: the candidate in individual and
    /// controlled modes, `None` for the baseline and the joint model.
    pub focal: Option<String>,
    /// Posterior means, one per covariate.
    pub coefficients: Vec<f64>,
    pub q_values: Vec<f64>,
    /// Central 95% posterior intervals.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub bic: BicReport,
    /// Standard deviation of each posterior mean across replicate seeds.
    pub coefficient_spread: Vec<f64>,
    pub bic_spread: Option<f64>,
}

impl ScanRow {
    /// Position of the focal covariate in `covariates`.
    pub fn focal_index(&self) -> Option<usize> {
        let f = self.focal.as_ref()?;
        self.covariates.iter().position(|c| c == f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub mode: ScanMode,
    pub baseline: ScanRow,
    /// Fitted models, smallest summed criterion first.
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    /// One line per model including the baseline, ordered by criterion:
    /// `covariate,coefficient,q,bic`. Multi-covariate models without a focal
    /// covariate list their covariates joined by `+` and leave the
    /// coefficient and q empty.
    pub fn bic_csv(&self) -> String {
        let mut rows: Vec<&ScanRow> = self.rows.iter().chain([&self.baseline]).collect();
        rows.sort_by(|a, b| {
            a.bic
                .total
                .total_cmp(&b.bic.total)
                .then_with(|| a.covariates.cmp(&b.covariates))
        });
        let mut out = String::from("covariate,coefficient,q,bic\n");
        for r in rows {
            let name = if r.covariates.is_empty() {
                "none".to_string()
            } else if let Some(f) = &r.focal {
                f.clone()
            } else {
                r.covariates.join("+")
            };
            match r.focal_index() {
                Some(k) => writeln!(out, "{name},{},{},{}", r.coefficients[k], r.q_values[k], r.bic.total),
                None => writeln!(out, "{name},,,{}", r.bic.total),
            }
            .expect("string write");
        }
        out
    }

    /// Per-covariate estimates ordered by q: `covariate,coefficient,q`. The
    /// joint model contributes every covariate; other modes contribute their
    /// focal covariate.
    pub fn q_csv(&self) -> String {
        let mut entries: Vec<(String, f64, f64)> = Vec::new();
        for r in &self.rows {
            match r.focal_index() {
                Some(k) => entries.push((r.covariates[k].clone(), r.coefficients[k], r.q_values[k])),
                None => {
                    for (k, c) in r.covariates.iter().enumerate() {
                        entries.push((c.clone(), r.coefficients[k], r.q_values[k]));
                    }
                }
            }
        }
        entries.sort_by(|a, b| a.2.total_cmp(&b.2).then_with(|| a.0.cmp(&b.0)));
        let mut out = String::from("covariate,coefficient,q\n");
        for (c, b, q) in entries {
            writeln!(out, "{c},{b},{q}").expect("string write");
        }
        out
    }
}

/// Fits the baseline and the models implied by `options.mode`, each by
/// posterior sampling under its own seed derived from `config.seed`.
/// `design` must hold every candidate and control column.
pub fn covariate_scan(
    net: &Network,
    design: &DyadDesign,
    dim: usize,
    groups: usize,
    priors: &Priors,
    config: &McmcConfig,
    options: &ScanOptions,
) -> Result<ScanResult> {
    for name in options.candidates.iter().chain(&options.control) {
        if design.column_index(name).is_none() {
            return Err(Error::Config(format!("unknown covariate `{name}`")));
        }
    }
    let fit = |covariates: Vec<String>, focal: Option<String>| -> Result<ScanRow> {
        fit_model(net, design, dim, groups, priors, config, covariates, focal, options.replicates)
    };
    let baseline = fit(Vec::new(), None)?;
    let mut rows = Vec::new();
    match options.mode {
        ScanMode::Individual => {
            for c in &options.candidates {
                rows.push(fit(vec![c.clone()], Some(c.clone()))?);
            }
        }
        ScanMode::Joint => {
            if !options.candidates.is_empty() {
                rows.push(fit(options.candidates.clone(), None)?);
            }
        }
        ScanMode::Controlled => {
            if options.control.is_empty() {
                return Err(Error::Config("controlled scan needs control covariates".into()));
            }
            rows.push(fit(options.control.clone(), None)?);
            for c in options.candidates.iter().filter(|c| !options.control.contains(c)) {
                let mut set = options.control.clone();
                set.push(c.clone());
                rows.push(fit(set, Some(c.clone()))?);
            }
        }
    }
    rows.sort_by(|a, b| {
        a.bic
            .total
            .total_cmp(&b.bic.total)
            .then_with(|| a.covariates.cmp(&b.covariates))
    });
    Ok(ScanResult {
        mode: options.mode,
        baseline,
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn fit_model(
    net: &Network,
    design: &DyadDesign,
    dim: usize,
    groups: usize,
    priors: &Priors,
    config: &McmcConfig,
    covariates: Vec<String>,
    focal: Option<String>,
    replicates: usize,
) -> Result<ScanRow> {
    let sub = design.select(&covariates)?;
    let key = format!("scan:{}", covariates.join("+"));
    let cfg = McmcConfig {
        seed: substream_seed(config.seed, &key),
        ..*config
    };
    let out = mcmc_sample(net, &sub, dim, groups, priors, &cfg)?;
    let p = covariates.len();
    let mut coefficients = Vec::with_capacity(p);
    let mut q_values = Vec::with_capacity(p);
    let mut lower = Vec::with_capacity(p);
    let mut upper = Vec::with_capacity(p);
    for k in 0..p {
        let d = out.beta_draws(k);
        coefficients.push(mean(&d));
        q_values.push(q_value(&d)?);
        lower.push(quantile(&d, 0.025));
        upper.push(quantile(&d, 0.975));
    }
    let mut coefficient_spread = Vec::new();
    let mut bic_spread = None;
    if replicates > 1 {
        let mut means = vec![coefficients.clone()];
        let mut bics = vec![out.bic.total];
        for r in 1..replicates {
            let cfg = McmcConfig {
                seed: substream_seed(config.seed, &format!("{key}:replicate-{r}")),
                ..*config
            };
            let o = mcmc_sample(net, &sub, dim, groups, priors, &cfg)?;
            means.push((0..p).map(|k| mean(&o.beta_draws(k))).collect());
            bics.push(o.bic.total);
        }
        coefficient_spread = (0..p)
            .map(|k| std_dev(&means.iter().map(|m| m[k]).collect::<Vec<_>>()))
            .collect();
        bic_spread = Some(std_dev(&bics));
    }
    Ok(ScanRow {
        covariates,
        focal,
        coefficients,
        q_values,
        lower,
        upper,
        bic: out.bic,
        coefficient_spread,
        bic_spread,
    })
}
