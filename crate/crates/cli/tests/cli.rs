use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use treescramble::output::RunConfig;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treescramble"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn graph_of_eight_sites() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["graph", "--n", "8", "--s", "0"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("graph_edges.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 20);
    let mut degree = [0usize; 8];
    for r in &rows {
        degree[r[0].parse::<usize>().unwrap()] += 1;
        degree[r[1].parse::<usize>().unwrap()] += 1;
    }
    assert!(degree.iter().all(|&d| d == 5), "{degree:?}");
    // antipodal bonds carry the doubled hopping
    for r in &rows {
        let expect = if r[2] == "4" { "2" } else { "1" };
        assert_eq!(r[5], expect, "{r:?}");
    }
}

#[test]
fn magnon_at_time_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "magnon", "--n", "16", "--s", "0", "--source", "8", "--tmax", "0",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("magnon_occupation.csv")).unwrap();
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1);
    for (j, v) in rows[0][1..].iter().enumerate() {
        let v: f64 = v.parse().unwrap();
        let want = if j == 8 { 1.0 } else { 0.0 };
        assert!((v - want).abs() < 1e-12, "site {j}: {v}");
    }
}

#[test]
fn bad_input_exits_with_usage_status() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["magnon", "--s", "abc"][..],
        &["graph", "--bogus"][..],
        &["graph", "--n", "12"][..],
        &["otoc-ed", "--method", "guess"][..],
        &["lightcone", "--s", "0,x"][..],
    ] {
        let out = run(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "semiclassical",
        "--n",
        "16",
        "--traj",
        "8",
        "--tmax",
        "1",
        "--seed",
        "7",
    ];
    assert!(run(&args, a.path()).status.success());
    assert!(run(&args, b.path()).status.success());
    for name in ["semiclassical_sensitivity.csv", "semiclassical_average.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let typ = [
        "otoc-ed",
        "--n",
        "8",
        "--method",
        "typicality",
        "--samples",
        "4",
        "--nt",
        "5",
        "--seed",
        "3",
    ];
    assert!(run(&typ, a.path()).status.success());
    assert!(run(&typ, b.path()).status.success());
    assert_eq!(
        fs::read(a.path().join("otoc.csv")).unwrap(),
        fs::read(b.path().join("otoc.csv")).unwrap()
    );
}

#[test]
fn provenance_feeds_back_as_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "quench-ee",
            "--n",
            "8",
            "--s=-1",
            "--times",
            "0.5,1",
            "--kinds",
            "archimedean",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let first = fs::read_to_string(dir.path().join("quench_entropy.csv")).unwrap();
    let header = first.lines().next().unwrap();
    let prov = RunConfig::parse_header(header).unwrap();
    assert_eq!(prov.get("s"), Some("-1"));

    let cfg_text: String = prov
        .entries()
        .iter()
        .filter(|(k, _)| k != "command")
        .map(|(k, v)| format!("{k} = \"{v}\"\n"))
        .collect();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, cfg_text).unwrap();
    let again = tempfile::tempdir().unwrap();
    let out = run(
        &["quench-ee", "--config", cfg.to_str().unwrap()],
        again.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let second = fs::read_to_string(again.path().join("quench_entropy.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep\nn = 16\ns = 1\n").unwrap();
    let out = run(
        &["graph", "--config", cfg.to_str().unwrap(), "--s", "0"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("graph_edges.csv")).unwrap();
    let prov = RunConfig::parse_header(text.lines().next().unwrap()).unwrap();
    assert_eq!(prov.get("n"), Some("16"));
    assert_eq!(prov.get("s"), Some("0"));
}

#[test]
fn expdesign_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["expdesign", "--n", "1024", "--eta", "1", "--atoms", "300"],
        dir.path(),
    );
    assert!(out.status.success());
    let table = fs::read_to_string(dir.path().join("expdesign_cooperativity.csv")).unwrap();
    assert_eq!(table.lines().nth(1), Some("beta,N,required_n_eta"));
    assert_eq!(data_rows(&table).len(), 46 * 7);
    let summary = fs::read_to_string(dir.path().join("expdesign_summary.txt")).unwrap();
    let rho: f64 = summary
        .lines()
        .find(|l| l.contains("\"rho\""))
        .and_then(|l| l.split(':').nth(1))
        .map(|v| v.trim().trim_end_matches(',').parse().unwrap())
        .unwrap();
    assert!((rho - 0.991).abs() < 1e-3, "{rho}");
}

#[test]
fn reproduce_prefixes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reproduce", "figS2", "--n", "256"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(dir
        .path()
        .join("figS2_expdesign_cooperativity.csv")
        .exists());
}
