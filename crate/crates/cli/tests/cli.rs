use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const K3: &str = "n 3\n0 1 1.0\n1 2 1.0\n0 2 1.0\n";

fn diffscat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diffscat"))
        .args(args)
        .env_remove("SCATTER_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn first_value(out: &Output) -> f64 {
    let text = stdout(out);
    let row = text.lines().nth(1).expect("data row");
    row.split(',').next().unwrap().parse().unwrap()
}

#[test]
fn scatter_column_count() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k3.txt", K3);
    let out = diffscat(&[
        "scatter",
        s(&g),
        "--random",
        "2",
        "--layers",
        "3",
        "--scales",
        "4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].split(',').count(), 21);
    assert!(lines[0].starts_with("0:,1:0,"));
    assert_eq!(lines[1].split(',').count(), 21);
}

#[test]
fn scatter_of_sqrt_degree_vector() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k3.txt", K3);
    let v = 1.0 / 3f64.sqrt();
    let x = write(&dir, "x.txt", &format!("{v} {v} {v}\n"));
    let out = diffscat(&[
        "scatter",
        s(&g),
        "--signals",
        s(&x),
        "--layers",
        "3",
        "--scales",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(row.len(), 1 + 2 + 4);
    assert!((row[0] - 1.0).abs() < 1e-12);
    assert!(row[1..].iter().all(|c| c.abs() < 1e-12));
}

#[test]
fn missing_file_names_path() {
    let out = diffscat(&["scatter", "/nonexistent/graph.txt", "--random", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/graph.txt"));
}

#[test]
fn malformed_edge_list_is_data_error() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "bad.txt", "n 3\n0 1 x\n");
    let out = diffscat(&["frame", s(&g)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn distance_same_and_permuted() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "n 4\n0 1 1.0\n1 2 2.0\n2 3 0.5\n0 2 1.0\n");
    // relabel 0->2, 1->0, 2->3, 3->1
    let b = write(&dir, "b.txt", "n 4\n2 0 1.0\n0 3 2.0\n3 1 0.5\n2 3 1.0\n");
    let same = diffscat(&["distance", s(&a), s(&a)]);
    assert_eq!(same.status.code(), Some(0));
    assert_eq!(first_value(&same), 0.0);
    let perm = diffscat(&["distance", s(&a), s(&b), "--mode", "exact"]);
    assert_eq!(perm.status.code(), Some(0));
    assert!(first_value(&perm).abs() < 1e-12);
    assert!(stdout(&perm)
        .lines()
        .next()
        .unwrap()
        .starts_with("value,mode"));
}

#[test]
fn exact_distance_rejects_large_graphs() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("n 9\n");
    for i in 0..8 {
        text.push_str(&format!("{i} {} 1.0\n", i + 1));
    }
    let g = write(&dir, "p9.txt", &text);
    let out = diffscat(&["distance", s(&g), s(&g), "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("heuristic"));
    let heur = diffscat(&["distance", s(&g), s(&g), "--mode", "heuristic"]);
    assert_eq!(heur.status.code(), Some(0));
}

#[test]
fn frame_report() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "k3.txt", K3);
    let out = diffscat(&["frame", s(&g), "--scales", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn bounds_verify_empty_and_deterministic() {
    let empty = diffscat(&["bounds-verify", "--pairs", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(stdout(&empty).lines().count(), 1);

    let a = diffscat(&["bounds-verify", "--pairs", "3", "--seed", "7"]);
    let b = diffscat(&["bounds-verify", "--pairs", "3", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 3 * 12);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_diffscat"));
        cmd.args(["bounds-verify", "--pairs", "2"])
            .env_remove("SCATTER_SEED");
        if let Some(e) = env {
            cmd.env("SCATTER_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        cmd.output().unwrap()
    };
    assert_eq!(run(Some("5"), None).stdout, run(None, Some("5")).stdout);
    assert_eq!(
        run(Some("9"), Some("5")).stdout,
        run(None, Some("5")).stdout
    );
    assert_eq!(run(Some("oops"), None).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(diffscat(&["scatter", "--bogus"]).status.code(), Some(2));
    assert_eq!(diffscat(&[]).status.code(), Some(2));
    assert_eq!(
        diffscat(&["bounds-verify", "--pairs", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(diffscat(&["--help"]).status.code(), Some(0));
}

#[test]
fn experiment_config_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "stab.cfg",
        "# small run\nn=20\np_sw=0.3\ngraphs=2\nsignals=3\nlayers=2\n",
    );
    let out_path = dir.path().join("curve.csv");
    let out = diffscat(&[
        "stability-curve",
        "--config",
        s(&cfg),
        "--set",
        "signals=4",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "p_sw,beta,m,mean_dist,var_dist,n_graphs,n_signals"
    );
    assert_eq!(lines.len(), 2);
    assert!(lines[1].ends_with(",2,4"));

    let bad = diffscat(&["stability-curve", "--set", "nonsense=1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn source_loc_small_run() {
    let out = diffscat(&[
        "source-loc",
        "--set",
        "n=40",
        "--set",
        "communities=2",
        "--set",
        "graphs=1",
        "--set",
        "n_train=40",
        "--set",
        "n_test=10",
        "--set",
        "representations=gft",
        "--set",
        "perturb_grid=0",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(
        text.lines().next().unwrap(),
        "representation,m,perturb_p,accuracy,n_train,n_test"
    );
    assert!(text.lines().any(|l| l.starts_with("gft,")));
}
