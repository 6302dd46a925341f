//! Subcommand implementations. Each reads its inputs, runs one module
//! operation and writes its artifacts into the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lsnet::community::{cut_dendrogram, hclust_complete, match_labels, Partition};
use lsnet::eval::{
    covariate_scan, gof_posterior_predictive, q_value, GofConfig, GofSummary, ScanMode,
    ScanOptions,
};
use lsnet::importance::{ols_fit, residual_extremes, ImportanceShares};
use lsnet::lpcm::{fit_two_stage_mle, mcmc_sample, select_g, McmcOutput};
use lsnet::lsm::{fit_mle, OptimizerConfig, Positions};
use lsnet::rng::substream_seed;
use lsnet::stats::{mean, quantile};
use lsnet::synth::{generate, SynthConfig};
use lsnet::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::data::Dataset;
use crate::output::{
    ensure_dir, memberships_csv, partition_csv, read_json, write_json, write_text, PositionsFile,
};

/// Configuration stored next to fit artifacts so later commands can rebuild
/// the fit exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config: RunConfig,
}

fn write_run(dir: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    write_json(
        dir,
        "run.json",
        &RunRecord {
            command: command.into(),
            config: cfg.clone(),
        },
    )
}

fn covariates(cfg: &RunConfig, data: &Dataset, default_all: bool) -> Vec<String> {
    match &cfg.covariates {
        Some(names) => data.resolve(names),
        None if default_all => data.available(),
        None => Vec::new(),
    }
}

pub fn simulate(config: &SynthConfig, out: &Path) -> Result<()> {
    let synthetic = generate(config)?;
    synthetic.write_to_dir(out, config)
}

pub fn fit_mle_cmd(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out()?;
    let data = Dataset::load(cfg)?;
    let names = covariates(cfg, &data, false);
    let design = data.design(&names)?;
    let labels = data.network.labels().to_vec();
    let optimizer = OptimizerConfig::default();
    ensure_dir(out)?;
    match cfg.groups {
        Some(g) => {
            let em = lsnet::lpcm::EmConfig {
                seed: substream_seed(cfg.seed.unwrap_or(0), "em"),
                ..Default::default()
            };
            let fit = fit_two_stage_mle(&data.network, &design, cfg.dim(), g, &optimizer, &em)?;
            let pos = PositionsFile::new("mle", &labels, &fit.state, &names, &fit.state.positions, None);
            write_json(out, "positions.json", &pos)?;
            write_json(out, "fit.json", &fit.report)?;
            write_text(
                out,
                "memberships.csv",
                &memberships_csv(&labels, &fit.mixture.responsibilities, &fit.partition),
            )?;
            write_text(out, "partition.csv", &partition_csv(&labels, &fit.partition))?;
            write_json(out, "bic.json", &fit.bic)?;
        }
        None => {
            let (state, report) = fit_mle(&data.network, &design, cfg.dim(), &optimizer)?;
            let pos = PositionsFile::new("mle", &labels, &state, &names, &state.positions, None);
            write_json(out, "positions.json", &pos)?;
            write_json(out, "fit.json", &report)?;
        }
    }
    write_run(out, "fit-mle", cfg)
}

#[derive(Serialize)]
struct CoefficientSummary {
    name: String,
    mean: f64,
    lower: f64,
    upper: f64,
    q: Option<f64>,
}

#[derive(Serialize)]
struct McmcSummary<'a> {
    groups: usize,
    samples: usize,
    burn_in: usize,
    iterations: usize,
    thin: usize,
    chains: usize,
    seed: u64,
    acceptance: lsnet::lpcm::AcceptanceRates,
    position_steps: &'a [f64],
    coefficient_steps: &'a [f64],
    priors: lsnet::lpcm::ResolvedPriors,
    coefficients: Vec<CoefficientSummary>,
    mixture: lsnet::lpcm::MixtureParams,
}

fn summarize(draws: &[f64], name: &str, with_q: bool) -> Result<CoefficientSummary> {
    Ok(CoefficientSummary {
        name: name.into(),
        mean: mean(draws),
        lower: quantile(draws, 0.025),
        upper: quantile(draws, 0.975),
        q: if with_q { Some(q_value(draws)?) } else { None },
    })
}

/// Runs the sampler described by a run config.
fn run_mcmc(cfg: &RunConfig, data: &Dataset) -> Result<(Vec<String>, McmcOutput)> {
    let names = covariates(cfg, data, false);
    let design = data.design(&names)?;
    let mcmc = cfg.mcmc()?;
    let out = mcmc_sample(&data.network, &design, cfg.dim(), cfg.groups()?, &cfg.priors()?, &mcmc)?;
    Ok((names, out))
}

fn write_mcmc_artifacts(cfg: &RunConfig, data: &Dataset, names: &[String], fit: &McmcOutput, out: &Path) -> Result<()> {
    let labels = data.network.labels();
    let pos = PositionsFile::new(
        "mcmc",
        labels,
        &fit.posterior_mean,
        names,
        &fit.reference,
        Some(&fit.plug_in.positions),
    );
    write_json(out, "positions.json", &pos)?;
    write_text(
        out,
        "memberships.csv",
        &memberships_csv(labels, &fit.memberships, &fit.map_partition),
    )?;
    write_text(out, "partition.csv", &partition_csv(labels, &fit.map_partition))?;
    write_json(out, "bic.json", &fit.bic)?;
    write_text(out, "beta_samples.csv", &fit.coefficient_csv())?;

    let mcmc = cfg.mcmc()?;
    let beta0: Vec<f64> = fit.samples.iter().map(|s| s.beta0).collect();
    let mut coefficients = vec![summarize(&beta0, "beta0", false)?];
    for (k, name) in names.iter().enumerate() {
        coefficients.push(summarize(&fit.beta_draws(k), name, true)?);
    }
    let summary = McmcSummary {
        groups: fit.groups,
        samples: fit.samples.len(),
        burn_in: mcmc.burn_in,
        iterations: mcmc.iterations,
        thin: mcmc.thin,
        chains: mcmc.chains,
        seed: mcmc.seed,
        acceptance: fit.acceptance,
        position_steps: &fit.position_steps,
        coefficient_steps: &fit.coefficient_steps,
        priors: fit.priors,
        coefficients,
        mixture: fit
            .samples
            .last()
            .map(|s| s.mixture.clone())
            .expect("sampler returns at least one sample"),
    };
    write_json(out, "mcmc.json", &summary)
}

pub fn fit_mcmc_cmd(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out()?;
    cfg.seed()?;
    cfg.groups()?;
    let data = Dataset::load(cfg)?;
    let (names, fit) = run_mcmc(cfg, &data)?;
    ensure_dir(out)?;
    write_mcmc_artifacts(cfg, &data, &names, &fit, out)?;
    write_run(out, "fit-mcmc", cfg)
}

pub fn select_g_cmd(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out()?;
    let mcmc = cfg.mcmc()?;
    let candidates = cfg.group_range(&[1, 2, 3, 4, 5])?;
    let data = Dataset::load(cfg)?;
    let names = covariates(cfg, &data, false);
    let design = data.design(&names)?;
    let sel = select_g(&data.network, &design, cfg.dim(), &candidates, &cfg.priors()?, &mcmc)?;
    ensure_dir(out)?;
    let mut csv = String::from("groups,logistic,mixture,total\n");
    for b in &sel.curve {
        writeln!(csv, "{},{},{},{}", b.groups, b.logistic, b.mixture, b.total).expect("string write");
    }
    write_text(out, "bic_curve.csv", &csv)?;
    write_json(out, "selection.json", &sel)?;
    write_run(out, "select-g", cfg)
}

fn fit_dir(cfg: &RunConfig) -> Result<&Path> {
    cfg.fit
        .as_deref()
        .ok_or_else(|| Error::Config("missing --fit directory; run fit-mle or fit-mcmc first".into()))
}

/// Artifacts go to `--out` when given, else into the fit directory.
fn report_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = match &cfg.out {
        Some(o) => o.clone(),
        None => fit_dir(cfg)?.to_path_buf(),
    };
    ensure_dir(&dir)?;
    Ok(dir)
}

fn load_positions(cfg: &RunConfig) -> Result<PositionsFile> {
    let dir = fit_dir(cfg)?;
    let path = dir.join("positions.json");
    if !path.is_file() {
        return Err(Error::Config(format!(
            "{} not found; run fit-mle or fit-mcmc with --out {} first",
            path.display(),
            dir.display()
        )));
    }
    read_json(dir, "positions.json")
}

/// The stored run config of a fit directory overlaid by the current flags.
fn fit_config(cfg: &RunConfig) -> Result<RunConfig> {
    let dir = fit_dir(cfg)?;
    if !dir.join("run.json").is_file() {
        return Err(Error::Config(format!(
            "{} holds no run.json; run fit-mcmc with --out {} first",
            dir.display(),
            dir.display()
        )));
    }
    let record: RunRecord = read_json(dir, "run.json")?;
    let mut merged = record.config;
    merged.overlay(cfg);
    Ok(merged)
}

fn response_positions(cfg: &RunConfig, pos: &PositionsFile) -> Result<Positions> {
    pos.select(cfg.response.as_deref().unwrap_or("posterior"))
}

#[derive(Serialize)]
struct Dendrogram {
    labels: Vec<String>,
    tree: serde_json::Value,
}

pub fn cluster_cmd(cfg: &RunConfig) -> Result<()> {
    let pos = load_positions(cfg)?;
    let z = response_positions(cfg, &pos)?;
    let range = cfg.group_range(&[2, 3, 4, 5, 6, 7])?;
    let out = report_dir(cfg)?;
    let n = z.n();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = z.distance(i, j);
        }
    }
    let dend = hclust_complete(&dist, n)?;
    write_json(
        &out,
        "dendrogram.json",
        &Dendrogram {
            labels: pos.labels.clone(),
            tree: dend.to_json_tree(&pos.labels),
        },
    )?;
    write_text(&out, "merges.csv", &dend.merge_table_csv())?;

    let mut sorted = range.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let mut cuts: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut previous: Option<Partition> = None;
    for &g in sorted.iter().filter(|&&g| g <= n) {
        let cut = cut_dendrogram(&dend, g)?;
        let labels = match &previous {
            Some(p) => match_labels(p, &cut)?.labels,
            None => cut.labels().to_vec(),
        };
        previous = Some(Partition::new(labels.clone())?);
        cuts.push((g, labels));
    }
    let mut csv = String::from("label");
    for (g, _) in &cuts {
        write!(csv, ",g{g}").expect("string write");
    }
    csv.push('\n');
    for (i, l) in pos.labels.iter().enumerate() {
        csv.push_str(l);
        for (_, labels) in &cuts {
            write!(csv, ",{}", labels[i] + 1).expect("string write");
        }
        csv.push('\n');
    }
    write_text(&out, "partitions.csv", &csv)
}

#[derive(Serialize)]
struct Regression<'a> {
    response: &'a str,
    names: &'a [String],
    coefficients: &'a [f64],
    standardized: &'a [f64],
    correlations: &'a [f64],
    r_squared: f64,
    pratt: &'a [f64],
    lmg: &'a [f64],
    negative_pratt: bool,
    threshold: f64,
    low_weights: BTreeMap<String, usize>,
    high_weights: BTreeMap<String, usize>,
}

pub fn importance_cmd(cfg: &RunConfig) -> Result<()> {
    let run = fit_config(cfg).unwrap_or_else(|_| cfg.clone());
    let pos = load_positions(cfg)?;
    let z = response_positions(cfg, &pos)?;
    let data = Dataset::load(&run)?;
    if data.network.labels() != pos.labels.as_slice() {
        return Err(Error::Validation(
            "fit labels differ from the loaded network; refit on these inputs".into(),
        ));
    }
    let names = match &cfg.covariates {
        Some(c) => data.resolve(c),
        None => data.available(),
    };
    if names.is_empty() {
        return Err(Error::Config("importance needs at least one covariate".into()));
    }
    let design = data.design(&names)?;
    let response = z.pairwise_distances();
    let shares = ImportanceShares::compute(&response, &design)?;
    let fit = ols_fit(&response, &design)?;
    let threshold = cfg.threshold.unwrap_or(4.0);
    let extremes = residual_extremes(&fit, z.n(), threshold)?;
    let out = report_dir(cfg)?;
    write_text(&out, "importance.csv", &shares.to_csv())?;

    let labels = &pos.labels;
    let weights = |w: &[usize]| -> BTreeMap<String, usize> {
        labels
            .iter()
            .zip(w)
            .filter(|(_, &c)| c > 0)
            .map(|(l, &c)| (l.clone(), c))
            .collect()
    };
    let reg = Regression {
        response: cfg.response.as_deref().unwrap_or("posterior"),
        names: &fit.names,
        coefficients: &fit.coefficients,
        standardized: &fit.standardized,
        correlations: &fit.correlations,
        r_squared: fit.r_squared,
        pratt: &shares.pratt,
        lmg: &shares.lmg,
        negative_pratt: shares.has_negative_pratt(),
        threshold,
        low_weights: weights(&extremes.low_weights),
        high_weights: weights(&extremes.high_weights),
    };
    write_json(&out, "regression.json", &reg)?;

    let mut csv = String::from("set,src,dst,residual\n");
    for (set, pairs) in [("low", &extremes.low), ("high", &extremes.high)] {
        for p in pairs {
            writeln!(csv, "{set},{},{},{}", labels[p.i], labels[p.j], p.residual).expect("string write");
        }
    }
    write_text(&out, "residual_extremes.csv", &csv)
}

pub fn scan_cmd(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out()?;
    let mcmc = cfg.mcmc()?;
    let groups = cfg.groups()?;
    let mode: ScanMode = cfg.mode.as_deref().unwrap_or("individual").parse()?;
    let data = Dataset::load(cfg)?;
    let control = cfg.control.as_ref().map(|c| data.resolve(c)).unwrap_or_default();
    let candidates: Vec<String> = covariates(cfg, &data, true)
        .into_iter()
        .filter(|c| !control.contains(c))
        .collect();
    let mut all = candidates.clone();
    all.extend(control.iter().cloned());
    let design = data.design(&all)?;
    let options = ScanOptions {
        mode,
        candidates,
        control,
        replicates: cfg.replicates.unwrap_or(1),
    };
    let result = covariate_scan(
        &data.network,
        &design,
        cfg.dim(),
        groups,
        &cfg.priors()?,
        &mcmc,
        &options,
    )?;
    ensure_dir(out)?;
    write_scan(out, &result)?;
    write_run(out, "scan", cfg)
}

fn write_scan(out: &Path, result: &lsnet::eval::ScanResult) -> Result<()> {
    write_text(out, "scan_bic.csv", &result.bic_csv())?;
    write_text(out, "scan_q.csv", &result.q_csv())?;
    write_json(out, "scan.json", result)
}

fn run_gof(cfg: &RunConfig, data: &Dataset, fit: &McmcOutput, names: &[String]) -> Result<GofSummary> {
    let design = data.design(names)?;
    let gof = GofConfig {
        replicates: cfg.replicates.unwrap_or(100),
        seed: substream_seed(cfg.seed()?, "gof"),
        binarize: !cfg.count_degree.unwrap_or(false),
    };
    gof_posterior_predictive(&data.network, &design, &fit.samples, &gof)
}

/// Posterior predictive checks for the fit in `--fit` (rebuilt from its run
/// config) or for a fresh fit described by the flags.
pub fn gof_cmd(cfg: &RunConfig) -> Result<()> {
    let run = if cfg.fit.is_some() { fit_config(cfg)? } else { cfg.clone() };
    let out = report_dir(&run)?;
    let data = Dataset::load(&run)?;
    let (names, fit) = run_mcmc(&run, &data)?;
    let summary = run_gof(&run, &data, &fit, &names)?;
    write_json(&out, "gof.json", &summary)
}

/// Every analysis artifact for a sampled fit directory.
pub fn report_cmd(cfg: &RunConfig) -> Result<()> {
    let run = fit_config(cfg)?;
    let out = report_dir(&run)?;
    let data = Dataset::load(&run)?;
    let pos = load_positions(cfg)?;

    let (names, fit) = run_mcmc(&run, &data)?;
    let summary = run_gof(&run, &data, &fit, &names)?;
    write_json(&out, "gof.json", &summary)?;

    let mut sub = run.clone();
    sub.out = Some(out.clone());
    sub.fit = Some(fit_dir(cfg)?.to_path_buf());
    sub.covariates = cfg.covariates.clone();
    sub.groups_range = None;
    if !data.available().is_empty() {
        importance_cmd(&sub)?;
    }
    let mut clusters = sub.clone();
    clusters.groups = None;
    cluster_cmd(&clusters)?;

    if !data.available().is_empty() {
        let mut scan = run.clone();
        scan.covariates = cfg.covariates.clone();
        let control = scan.control.as_ref().map(|c| data.resolve(c)).unwrap_or_default();
        let candidates: Vec<String> = covariates(&scan, &data, true)
            .into_iter()
            .filter(|c| !control.contains(c))
            .collect();
        let mut all = candidates.clone();
        all.extend(control.iter().cloned());
        let design = data.design(&all)?;
        let options = ScanOptions {
            mode: scan.mode.as_deref().unwrap_or("individual").parse()?,
            candidates,
            control,
            replicates: 1,
        };
        let result = covariate_scan(
            &data.network,
            &design,
            scan.dim(),
            scan.groups()?,
            &scan.priors()?,
            &scan.mcmc()?,
            &options,
        )?;
        write_scan(&out, &result)?;
    }

    write_text(&out, "latent_positions.csv", &latent_csv(&pos, &fit.map_partition))?;
    if let Some(nodes) = &data.nodes {
        let mut csv = String::from("label,lat,lon,group\n");
        for (l, g) in pos.labels.iter().zip(&fit.map_partition) {
            if let Some((lat, lon)) = nodes.coordinates(l) {
                writeln!(csv, "{l},{lat},{lon},{}", g + 1).expect("string write");
            }
        }
        write_text(&out, "map_points.csv", &csv)?;
    }
    Ok(())
}

fn latent_csv(pos: &PositionsFile, groups: &[usize]) -> String {
    let mut csv = String::from("label");
    for c in 1..=pos.dim {
        write!(csv, ",z{c}").expect("string write");
    }
    csv.push_str(",group\n");
    for ((l, row), g) in pos.labels.iter().zip(&pos.positions).zip(groups) {
        csv.push_str(l);
        for v in row {
            write!(csv, ",{v}").expect("string write");
        }
        writeln!(csv, ",{}", g + 1).expect("string write");
    }
    csv
}
