use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use comir_diag::image::Image;
use comir_diag::io::{write_pgm, CsvTable, MatrixFile, MetricsReport, PgmFormat};
use comir_diag::matrix::Matrix;
use comir_diag::metrics::{median, pcc};
use comir_diag::registration::textured_image;
use tempfile::TempDir;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_comir-diag"))
        .args(args)
        .env_remove("COMIR_OUT_DIR")
        .env_remove("COMIR_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = cli(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn table(p: &Path) -> CsvTable {
    CsvTable::read(p).unwrap()
}

fn cell(t: &CsvTable, row: usize, col: &str) -> String {
    t.rows[row][t.column(col).unwrap_or_else(|| panic!("no column {col}"))].clone()
}

fn small_training(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "train-toy",
        "--output-dir",
        s(dir),
        "--optimizer-epochs",
        "4",
        "--dataset-n-samples",
        "64",
    ];
    args.extend_from_slice(extra);
    ok(&args);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn train_toy_with_zero_learning_rate_keeps_the_embeddings() {
    let tmp = TempDir::new().unwrap();
    small_training(tmp.path(), &["--optimizer-learning-rate", "0"]);
    for set in ["bn_a", "bn_b", "final_a", "final_b"] {
        let a = MatrixFile::read(&tmp.path().join(format!("emb_initial_{set}.mtx"))).unwrap();
        let b = MatrixFile::read(&tmp.path().join(format!("emb_trained_{set}.mtx"))).unwrap();
        assert_eq!(a.matrix, b.matrix, "{set}");
    }
    let trace = table(&tmp.path().join("trace.csv"));
    assert_eq!(
        trace.header,
        ["epoch", "iteration", "contrastive", "bottleneck", "loss"]
    );
    assert_eq!(trace.rows.len(), 4 * 32);
}

#[test]
fn train_toy_is_deterministic_and_schedule_sensitive() {
    let tmp = TempDir::new().unwrap();
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    small_training(&a, &[]);
    small_training(&b, &[]);
    small_training(
        &c,
        &[
            "--schedule-kind",
            "pretraining",
            "--schedule-pretrain-split-epoch",
            "2",
        ],
    );
    assert_eq!(files(&a), files(&b));
    let fa = fs::read(a.join("emb_trained_final_a.mtx")).unwrap();
    let fc = fs::read(c.join("emb_trained_final_a.mtx")).unwrap();
    assert_ne!(fa, fc);
    assert_eq!(
        cell(&table(&c.join("train_summary.csv")), 0, "schedule"),
        "pretraining"
    );
}

#[test]
fn config_file_env_and_flags_layer_in_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("exp.toml");
    let from_file = tmp.path().join("from-file");
    let from_env = tmp.path().join("from-env");
    fs::write(
        &cfg,
        format!(
            "output_dir = \"{}\"\n[optimizer]\nepochs = 2\n[dataset]\nn_samples = 40\n",
            from_file.display()
        ),
    )
    .unwrap();
    ok(&["train-toy", "--config", s(&cfg)]);
    assert_eq!(table(&from_file.join("trace.csv")).rows.len(), 2 * 32);

    let out = Command::new(env!("CARGO_BIN_EXE_comir-diag"))
        .args(["train-toy", "--config", s(&cfg), "--optimizer-epochs", "3"])
        .env("COMIR_OUT_DIR", &from_env)
        .env("COMIR_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(table(&from_env.join("trace.csv")).rows.len(), 3 * 32);
}

#[test]
fn exit_codes_follow_the_error_class() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["train-toy", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(
        cli(&["train-toy", "--optimizer-epochs", "lots"])
            .status
            .code(),
        Some(1)
    );
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "[optimizer]\nlr = 1\n").unwrap();
    assert_eq!(
        cli(&["train-toy", "--config", s(&bad)]).status.code(),
        Some(1)
    );

    let broken = tmp.path().join("broken.mtx");
    fs::write(&broken, "MTX1\n2 2\n1 2\n3 oops\n").unwrap();
    let out = cli(&[
        "spectrum",
        "--input",
        s(&broken),
        "--output-dir",
        s(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    let env_threads = Command::new(env!("CARGO_BIN_EXE_comir-diag"))
        .args(["report", "--run", s(tmp.path())])
        .env("COMIR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(env_threads.status.code(), Some(1));
}

#[test]
fn register_synthesized_pairs_meet_the_default_threshold() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("reg");
    ok(&[
        "register",
        "--registration-n-pairs",
        "10",
        "--output-dir",
        s(&out),
    ]);
    let summary = table(&out.join("registration_summary.csv"));
    assert_eq!(cell(&summary, 0, "rsr"), "100");
    let rows = table(&out.join("registration.csv"));
    let ids: Vec<String> = rows.rows.iter().map(|r| r[0].clone()).collect();
    assert_eq!(ids, (0..10).map(|i| i.to_string()).collect::<Vec<_>>());
    // The summary median is recomputable from the rows.
    let errs: Vec<f64> = rows
        .f64_column("error_px")
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert_eq!(
        cell(&summary, 0, "median_error_px").parse::<f64>().unwrap(),
        median(&errs).unwrap()
    );
}

#[test]
fn register_threshold_fraction_and_directory_mode() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    ok(&[
        "register",
        "--registration-n-pairs",
        "3",
        "--registration-texture-size",
        "300",
        "--registration-threshold-fraction",
        "0.02",
        "--emit-pairs",
        "--output-dir",
        s(&first),
    ]);
    let rows = table(&first.join("registration.csv"));
    assert!(rows
        .rows
        .iter()
        .all(|r| r[rows.column("threshold_px").unwrap()] == "6"));

    // Re-register the emitted pairs from disk, with one unreadable moving image.
    let moving = first.join("pairs/moving");
    fs::write(moving.join("0001.pgm"), b"not a pgm").unwrap();
    let second = tmp.path().join("second");
    ok(&[
        "register",
        "--fixed-dir",
        s(&first.join("pairs/fixed")),
        "--moving-dir",
        s(&moving),
        "--output-dir",
        s(&second),
    ]);
    let rows = table(&second.join("registration.csv"));
    assert_eq!(rows.rows.len(), 3);
    assert!(cell(&rows, 1, "failure").starts_with("read:"));
    assert_eq!(cell(&rows, 1, "success"), "false");
    assert_eq!(cell(&rows, 0, "success"), "true");
    assert_eq!(
        cell(
            &table(&second.join("registration_summary.csv")),
            0,
            "successes"
        ),
        "2"
    );
}

#[test]
fn register_rejects_an_empty_directory_without_output() {
    let tmp = TempDir::new().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out_dir = tmp.path().join("out");
    let out = cli(&[
        "register",
        "--fixed-dir",
        s(&empty),
        "--moving-dir",
        s(&empty),
        "--output-dir",
        s(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!out_dir.join("registration.csv").exists());
}

fn write_set(dir: &Path, images: &[Image]) {
    for (i, img) in images.iter().enumerate() {
        write_pgm(
            &dir.join(format!("{i:02}.pgm")),
            img,
            PgmFormat::Binary,
            true,
        )
        .unwrap();
    }
}

#[test]
fn eval_metrics_identities_medians_and_row_errors() {
    let tmp = TempDir::new().unwrap();
    let imgs: Vec<Image> = (0..5).map(|k| textured_image(32, 32, k).unwrap()).collect();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    write_set(&a, &imgs);
    write_set(&b, &imgs);
    let same = tmp.path().join("same");
    ok(&[
        "eval-metrics",
        "--a-dir",
        s(&a),
        "--b-dir",
        s(&b),
        "--output-dir",
        s(&same),
    ]);
    let rows = table(&same.join("metrics_pairs.csv"));
    for r in 0..5 {
        assert_eq!(cell(&rows, r, "mse"), "0");
        assert_eq!(cell(&rows, r, "correlation"), "1");
        assert_eq!(cell(&rows, r, "ssim"), "1");
        assert_eq!(cell(&rows, r, "alpha_amd"), "0");
    }

    // Odd-count medians are the middle order statistic; a size mismatch only
    // fails its own row.
    let other: Vec<Image> = (10..15)
        .map(|k| textured_image(32, 32, k).unwrap())
        .collect();
    write_set(&b, &other);
    write_pgm(
        &b.join("04.pgm"),
        &textured_image(16, 16, 1).unwrap(),
        PgmFormat::Ascii,
        false,
    )
    .unwrap();
    let diff = tmp.path().join("diff");
    ok(&[
        "eval-metrics",
        "--a-dir",
        s(&a),
        "--b-dir",
        s(&b),
        "--output-dir",
        s(&diff),
    ]);
    let t = table(&diff.join("metrics_pairs.csv"));
    assert!(cell(&t, 4, "error").contains("size mismatch"));
    assert_eq!(
        t.f64_column("mse").unwrap().into_iter().flatten().count(),
        4
    );
    write_pgm(&b.join("04.pgm"), &other[4], PgmFormat::Binary, true).unwrap();
    let odd = tmp.path().join("odd");
    ok(&[
        "eval-metrics",
        "--a-dir",
        s(&a),
        "--b-dir",
        s(&b),
        "--output-dir",
        s(&odd),
    ]);
    let t = table(&odd.join("metrics_pairs.csv"));
    let mut mse: Vec<f64> = t.f64_column("mse").unwrap().into_iter().flatten().collect();
    mse.sort_by(f64::total_cmp);
    let report: MetricsReport =
        serde_json::from_str(&fs::read_to_string(odd.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(report.aggregates[0].median, mse[2]);
    let agg = table(&odd.join("metrics_aggregates.csv"));
    assert_eq!(agg.rows[0], ["median", "mse", &mse[2].to_string()]);
    // CSV and JSON carry identical rows.
    assert_eq!(MetricsReport::pairs_from_table(&t).unwrap(), report.pairs);
}

#[test]
fn report_pcc_matches_the_emitted_run_table() {
    let tmp = TempDir::new().unwrap();
    let base: Vec<Image> = (0..3).map(|k| textured_image(24, 24, k).unwrap()).collect();
    let a = tmp.path().join("a");
    write_set(&a, &base);
    let mut runs: Vec<PathBuf> = Vec::new();
    for (k, (noise, rsr)) in [(0.05, 90.0), (0.2, 60.0), (0.1, 80.0), (0.4, 20.0)]
        .iter()
        .enumerate()
    {
        let b = tmp.path().join(format!("b{k}"));
        let noisy: Vec<Image> = base
            .iter()
            .enumerate()
            .map(|(i, img)| {
                let n = textured_image(24, 24, 100 + i as u64).unwrap();
                Image::from_fn(24, 24, |x, y| {
                    (1.0 - noise) * img.get(x, y) + noise * n.get(x, y)
                })
                .unwrap()
            })
            .collect();
        write_set(&b, &noisy);
        let run = tmp.path().join(format!("run{k}"));
        ok(&[
            "eval-metrics",
            "--a-dir",
            s(&a),
            "--b-dir",
            s(&b),
            "--output-dir",
            s(&run),
        ]);
        // A stand-in registration summary for the run.
        let mut t = CsvTable::new(["pairs", "rsr"]);
        t.push(vec!["3".into(), rsr.to_string()]);
        t.write(&run.join("registration_summary.csv")).unwrap();
        runs.push(run);
    }
    let out = tmp.path().join("report");
    let mut args = vec!["report", "--output-dir", s(&out)];
    for r in &runs {
        args.push("--run");
        args.push(s(r));
    }
    ok(&args);
    let table_runs = table(&out.join("report_runs.csv"));
    let pccs = table(&out.join("report_pcc.csv"));
    assert_eq!(pccs.rows.len(), 4);
    let rsr: Vec<f64> = table_runs
        .f64_column("registration_summary.rsr")
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect();
    for row in &pccs.rows {
        let means: Vec<f64> = table_runs
            .f64_column(&format!("mean_{}", row[0]))
            .unwrap()
            .into_iter()
            .map(Option::unwrap)
            .collect();
        assert_eq!(row[1].parse::<f64>().unwrap(), pcc(&means, &rsr).unwrap());
        assert_eq!(row[2], "4");
    }
}

#[test]
fn mds_on_planar_distances_and_spectrum_of_rank_two_data() {
    let tmp = TempDir::new().unwrap();
    let pts: Vec<[f64; 2]> = (0..12)
        .map(|i| {
            [
                (i as f64 * 1.7).sin() * 3.0,
                (i as f64 * 0.9).cos() * 2.0 + i as f64 * 0.1,
            ]
        })
        .collect();
    let d = Matrix::from_fn(12, 12, |i, j| {
        (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1])
    });
    let delta = tmp.path().join("delta.mtx");
    MatrixFile::new(d).write(&delta).unwrap();
    let (r1, r2) = (tmp.path().join("m1"), tmp.path().join("m2"));
    ok(&["mds", "--delta", s(&delta), "--output-dir", s(&r1), "--svg"]);
    ok(&["mds", "--delta", s(&delta), "--output-dir", s(&r2), "--svg"]);
    let stress: f64 = cell(&table(&r1.join("mds_summary.csv")), 0, "final_stress")
        .parse()
        .unwrap();
    assert!(stress < 1e-6, "{stress}");
    let mtx = MatrixFile::read(&r1.join("mds_points.mtx")).unwrap();
    assert_eq!(
        mtx.meta("final_stress").unwrap().parse::<f64>().unwrap(),
        stress
    );
    assert_eq!(files(&r1), files(&r2));
    let hist = table(&r1.join("mds_history.csv"));
    let h: Vec<f64> = hist
        .f64_column("stress")
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert!(h.windows(2).all(|w| w[1] <= w[0]));

    // Rank-2 embeddings in d = 8.
    let emb = Matrix::from_fn(50, 8, |i, j| {
        let (u, v) = ((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos());
        u * (j as f64 + 1.0) - v * (j as f64 * 0.5 - 1.0)
    });
    let input = tmp.path().join("emb.mtx");
    MatrixFile::new(emb).write(&input).unwrap();
    let sp = tmp.path().join("sp");
    ok(&[
        "spectrum",
        "--input",
        s(&input),
        "--output-dir",
        s(&sp),
        "--svg",
    ]);
    let vals: Vec<f64> = table(&sp.join("spectrum.csv"))
        .f64_column("value")
        .unwrap()
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert_eq!(vals.len(), 8);
    assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(vals.iter().filter(|&&v| v < 1e-10 * vals[0]).count(), 6);
    assert_eq!(
        cell(
            &table(&sp.join("spectrum_collapse.csv")),
            0,
            "collapsed_dims"
        ),
        "6"
    );
    assert!(fs::read_to_string(sp.join("spectrum.svg"))
        .unwrap()
        .contains("<polyline"));
}

#[test]
fn mds_of_paired_embeddings_labels_both_modalities() {
    let tmp = TempDir::new().unwrap();
    small_training(tmp.path(), &[]);
    let a = tmp.path().join("emb_trained_final_a.mtx");
    let b = tmp.path().join("emb_trained_final_b.mtx");
    ok(&[
        "mds",
        "--a",
        s(&a),
        "--b",
        s(&b),
        "--name",
        "final",
        "--svg",
        "--output-dir",
        s(tmp.path()),
        "--mds-max-iters",
        "50",
    ]);
    let pts = table(&tmp.path().join("final_points.csv"));
    assert_eq!(pts.header, ["x", "y", "modality", "pair_id"]);
    assert_eq!(pts.rows.len(), 128);
    assert_eq!(
        (cell(&pts, 0, "modality"), cell(&pts, 64, "modality")),
        ("A".into(), "B".into())
    );
    assert_eq!(cell(&pts, 64, "pair_id"), "0");
    let svg = fs::read_to_string(tmp.path().join("final.svg")).unwrap();
    assert_eq!(svg.matches("<line").count(), 64);
}
