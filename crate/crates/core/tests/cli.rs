use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn decwa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decwa"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Two well separated groups of ten points with labels in the last column.
fn blobs(dir: &TempDir) -> PathBuf {
    let mut s = String::from("x,y,label\n");
    for i in 0..10 {
        s += &format!("{},{},0\n", 0.1 * i as f64, 0.05 * (i % 3) as f64);
    }
    for i in 0..10 {
        s += &format!("{},{},1\n", 30.0 + 0.1 * i as f64, 0.05 * (i % 4) as f64);
    }
    let p = dir.path().join("blobs.csv");
    fs::write(&p, s).unwrap();
    p
}

fn fit_blobs(dir: &TempDir, extra: &[&str]) -> (Output, PathBuf) {
    let input = blobs(dir);
    let labels = dir.path().join("labels.txt");
    let mut args = vec![
        "fit",
        "--input",
        path_str(&input),
        "--header",
        "--label-column",
        "last",
        "--k",
        "3",
        "--bandwidth",
        "0.05",
        "--output",
        path_str(&labels),
    ];
    args.extend_from_slice(extra);
    (decwa(&args), labels)
}

#[test]
fn fit_writes_one_label_per_point() {
    let dir = TempDir::new().unwrap();
    let (o, labels) = fit_blobs(&dir, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(labels).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 20);
    assert!(lines[..10].iter().all(|&l| l == "0"));
    assert!(lines[10..].iter().all(|&l| l == "1"));
    let out = stdout(&o);
    assert!(
        out.contains("params: --metric euclidean --k 3 --bandwidth 0.05"),
        "{out}"
    );
    assert!(out.contains("clusters: 2"));
    assert!(out.contains("ari: 1\n"));
}

#[test]
fn emitted_density_integrates_to_one() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("curve.csv");
    let (o, _) = fit_blobs(&dir, &["--emit-density", path_str(&curve)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<(f64, f64)> = fs::read_to_string(curve)
        .unwrap()
        .lines()
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 1024);
    let area: f64 = rows
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    assert!((area - 1.0).abs() < 1e-3, "area {area}");
}

#[test]
fn invalid_parameters_exit_with_usage_code() {
    let dir = TempDir::new().unwrap();
    let (o, _) = fit_blobs(&dir, &["--k", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let (o, _) = fit_blobs(&dir, &["--bandwidth=-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bandwidth"));
    let (o, _) = fit_blobs(&dir, &["--metric", "chebyshev"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(decwa(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_cell_reports_its_line() {
    let dir = TempDir::new().unwrap();
    let mut s = String::from("x,y\n");
    for i in 0..5 {
        s += &format!("{i},{i}\n");
    }
    s += "6,oops\n";
    let input = dir.path().join("bad.csv");
    fs::write(&input, s).unwrap();
    let out = dir.path().join("labels.txt");
    let o = decwa(&[
        "fit",
        "--input",
        path_str(&input),
        "--header",
        "--k",
        "2",
        "--output",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":7:"), "{}", stderr(&o));

    let missing = dir.path().join("nope.csv");
    let o = decwa(&[
        "fit",
        "--input",
        path_str(&missing),
        "--output",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tune_with_collapsed_space_records_one_trial() {
    let dir = TempDir::new().unwrap();
    let input = blobs(&dir);
    let history = dir.path().join("history.csv");
    let o = decwa(&[
        "tune",
        "--input",
        path_str(&input),
        "--header",
        "--label-column",
        "last",
        "--k-range",
        "3:3",
        "--bandwidth-range",
        "0.05:0.05",
        "--lambda-range",
        "1:1",
        "--alpha-range",
        "0.1:0.1",
        "--iterations",
        "1",
        "--output",
        path_str(&history),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&history).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("trial_index,k,bandwidth"));
    assert_eq!(
        lines[1],
        "0,3,0.05,gaussian,1,0.1,euclidean,1024,3,single-pass,0,1,0,2"
    );
    let best = fs::read_to_string(dir.path().join("history.csv.best")).unwrap();
    assert!(best.contains("--k 3 --bandwidth 0.05"), "{best}");
    assert!(stdout(&o).contains("best_ari: 1"));
}

#[test]
fn tune_requires_labels() {
    let dir = TempDir::new().unwrap();
    let input = blobs(&dir);
    let history = dir.path().join("history.csv");
    let o = decwa(&[
        "tune",
        "--input",
        path_str(&input),
        "--header",
        "--output",
        path_str(&history),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--label-column"));
}

#[test]
fn tune_output_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let input = blobs(&dir);
    let run = |name: &str, seed: &str| {
        let history = dir.path().join(name);
        let o = decwa(&[
            "tune",
            "--input",
            path_str(&input),
            "--header",
            "--label-column",
            "last",
            "--iterations",
            "25",
            "--seed",
            seed,
            "--output",
            path_str(&history),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(history).unwrap()
    };
    let a = run("a.csv", "4");
    assert_eq!(a, run("b.csv", "4"));
    assert_ne!(a, run("c.csv", "5"));
}

#[test]
fn eval_scores_label_files() {
    let dir = TempDir::new().unwrap();
    let truth = dir.path().join("truth.txt");
    let same = dir.path().join("same.txt");
    let flat = dir.path().join("flat.txt");
    let short = dir.path().join("short.txt");
    fs::write(&truth, "0\n0\n1\n1\n2\n2\n").unwrap();
    fs::write(&same, "5\n5\n3\n3\n-1\n-1\n").unwrap();
    fs::write(&flat, "0\n0\n0\n0\n0\n0\n").unwrap();
    fs::write(&short, "0\n0\n").unwrap();

    let o = decwa(&["eval", path_str(&same), path_str(&truth)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("ari: 1\n"), "{}", stdout(&o));
    assert!(stdout(&o).contains("outlier_ratio: 0.333333"));

    let o = decwa(&[
        "eval",
        path_str(&same),
        path_str(&truth),
        "--outlier-mode",
        "singletons",
    ]);
    assert!(!stdout(&o).contains("ari: 1\n"));

    let o = decwa(&["eval", path_str(&flat), path_str(&truth)]);
    assert!(stdout(&o).contains("ari: 0\n"), "{}", stdout(&o));

    let o = decwa(&["eval", path_str(&short), path_str(&truth)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn density_subcommand_writes_curve() {
    let dir = TempDir::new().unwrap();
    let input = blobs(&dir);
    let curve = dir.path().join("curve.csv");
    let o = decwa(&[
        "density",
        "--input",
        path_str(&input),
        "--header",
        "--label-column",
        "last",
        "--k",
        "3",
        "--grid-size",
        "64",
        "--output",
        path_str(&curve),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(curve).unwrap().lines().count(), 64);
    assert!(stdout(&o).contains("samples: 18"));
}
