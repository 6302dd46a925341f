use std::path::Path;
use std::process::{Command, Output};

fn lsnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = lsnet(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn simulate(dir: &Path, seed: &str) {
    ok(&[
        "simulate",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        seed,
        "--n-nodes",
        "24",
        "--coef",
        "travel=-1",
    ]);
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fit_args<'a>(data: &'a str, out: &'a str, extra: &[&'a str]) -> Vec<String> {
    let mut v: Vec<String> = [
        "--nodes",
        &format!("{data}/nodes.csv"),
        "--edges",
        &format!("{data}/edges.csv"),
        "--pairs",
        &format!("{data}/travel.csv"),
        "--out",
        out,
    ]
    .iter()
    .map(|x| x.to_string())
    .collect();
    v.extend(extra.iter().map(|x| x.to_string()));
    v
}

const SHORT: [&str; 8] = ["--burnin", "200", "--iterations", "1000", "--thin", "10", "--seed", "3"];

fn run_owned(cmd: &str, args: &[String]) -> Output {
    let mut all = vec![cmd.to_string()];
    all.extend(args.iter().cloned());
    let refs: Vec<&str> = all.iter().map(String::as_str).collect();
    lsnet(&refs)
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn simulate_is_deterministic_and_loadable() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    simulate(&a, "7");
    simulate(&b, "7");
    for f in ["nodes.csv", "edges.csv", "travel.csv", "truth.json"] {
        assert_eq!(read(&a.join(f)), read(&b.join(f)), "{f}");
    }
    let out = tmp.path().join("mle");
    let args = fit_args(s(&a), s(&out), &["--covariates", "travel"]);
    let o = run_owned("fit-mle", &args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["positions.json", "fit.json", "run.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn very_negative_intercept_gives_sparse_edges() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    ok(&["simulate", "--out", s(&d), "--n-nodes", "30", "--beta0", "-30"]);
    assert_eq!(read(&d.join("edges.csv")).lines().count(), 1);
}

#[test]
fn fit_mcmc_is_byte_identical_and_report_completes() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    simulate(&data, "11");
    let mut extra = vec!["--groups", "3", "--covariates", "travel"];
    extra.extend(SHORT);
    let one = tmp.path().join("one");
    let two = tmp.path().join("two");
    for out in [&one, &two] {
        let o = run_owned("fit-mcmc", &fit_args(s(&data), s(out), &extra));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let files = [
        "positions.json",
        "memberships.csv",
        "partition.csv",
        "bic.json",
        "mcmc.json",
        "beta_samples.csv",
    ];
    for f in files {
        assert_eq!(read(&one.join(f)), read(&two.join(f)), "{f} differs");
    }

    ok(&["report", "--fit", s(&one), "--replicates", "10"]);
    for f in [
        "importance.csv",
        "regression.json",
        "residual_extremes.csv",
        "scan_bic.csv",
        "scan_q.csv",
        "scan.json",
        "gof.json",
        "dendrogram.json",
        "merges.csv",
        "partitions.csv",
        "latent_positions.csv",
        "map_points.csv",
    ] {
        assert!(one.join(f).is_file(), "{f} missing");
    }
    for f in ["regression.json", "scan.json", "gof.json", "dendrogram.json"] {
        serde_json::from_str::<serde_json::Value>(&read(&one.join(f))).expect(f);
    }

    let imp = read(&one.join("importance.csv"));
    for col in [1, 2] {
        let total: f64 = imp
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(col).unwrap().parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-9, "column {col} sums to {total}");
    }

    let bics: Vec<f64> = read(&one.join("scan_bic.csv"))
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(bics.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(bics.len(), 1 + 6);
}

#[test]
fn missing_nodes_file_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.csv");
    let o = lsnet(&[
        "fit-mle",
        "--nodes",
        s(&missing),
        "--edges",
        s(&missing),
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.csv"));
}

#[test]
fn sampling_without_seed_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    simulate(&data, "1");
    let o = run_owned("fit-mcmc", &fit_args(s(&data), s(tmp.path()), &["--groups", "2"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn report_without_fit_is_instructive() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lsnet(&["report", "--fit", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("run.json") && msg.contains("fit-mcmc"), "{msg}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    simulate(&data, "2");
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "nodes = \"{0}/nodes.csv\"\nedges = \"{0}/edges.csv\"\ngroups = 2\nseed = 1\nburnin = 100\niterations = 400\nthin = 4\nout = \"{1}\"\n",
            s(&data),
            s(&tmp.path().join("from_file"))
        ),
    )
    .unwrap();
    let flagged = tmp.path().join("flagged");
    ok(&["--config", s(&cfg), "fit-mcmc", "--groups", "3", "--out", s(&flagged)]);
    let header = read(&flagged.join("memberships.csv")).lines().next().unwrap().to_string();
    assert_eq!(header, "label,p_1,p_2,p_3,group");
    assert!(!tmp.path().join("from_file").exists());
}

#[test]
fn select_g_and_cluster_write_their_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    simulate(&data, "4");
    let out = tmp.path().join("sel");
    let mut extra = vec!["--groups-range", "1..2"];
    extra.extend(SHORT);
    let o = run_owned("select-g", &fit_args(s(&data), s(&out), &extra));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out.join("bic_curve.csv")).lines().count(), 3);

    let mle = tmp.path().join("mle");
    let o = run_owned("fit-mle", &fit_args(s(&data), s(&mle), &["--groups", "3"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    ok(&["cluster", "--fit", s(&mle), "--response", "mle"]);
    let parts = read(&mle.join("partitions.csv"));
    assert!(parts.starts_with("label,g2,g3,g4,g5,g6,g7\n"));
    assert_eq!(parts.lines().count(), 25);
}
