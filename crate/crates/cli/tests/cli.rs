use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hoiseg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoiseg"))
        .current_dir(dir)
        .args(["--config", "tiny.conf"])
        .args(args)
        .output()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("tiny.conf"),
        "frame_width = 48\nframe_height = 36\npatch_width = 8\npatch_height = 8\nfeatures = 30\n\
         depth = 6\ntrees = 2\nframes_per_tree = 4\nthresholds = 10\nresponse_samples = 10\n\
         test_frames = 2\nvalidation_frames = 2\nlambda_grid = 0.5 1\nnoise_levels = 0 0.15\n\
         feature_levels = 10\nframe_levels = 2 4\n",
    )
    .unwrap();
    dir
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn full_pipeline() {
    let dir = setup();
    let d = dir.path();
    ok(&hoiseg(d, &["synth", "--count", "4", "--out", "data"]));
    assert!(d.join("data/manifest.txt").exists() && d.join("data/config.txt").exists());
    let out = ok(&hoiseg(d, &["train", "--manifest", "data/manifest.txt", "--model", "m/model.rdf"]));
    assert_eq!(out.lines().filter(|l| l.starts_with("tree ")).count(), 2);
    assert!(fs::read(d.join("m/model.rdf")).unwrap().starts_with(b"RDF1"));

    let out = ok(&hoiseg(
        d,
        &[
            "predict", "--model", "m/model.rdf", "--depth", "data/frames/000000.dpth", "--out", "a.lbls",
            "--crf", "--timings", "--posteriors", "p.tsv",
        ],
    ));
    assert!(out.contains("forest_ms") && out.contains("crf_ms"));
    let post = fs::read_to_string(d.join("p.tsv")).unwrap();
    assert_eq!(post.lines().count(), 48 * 36 + 1);
    for line in post.lines().skip(1) {
        let s: f64 = line.split('\t').skip(2).map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-5);
    }

    ok(&hoiseg(d, &["synth", "--count", "2", "--out", "test", "--split", "test"]));
    let out = ok(&hoiseg(d, &["eval", "--model", "m/model.rdf", "--manifest", "test/manifest.txt", "--out", "ev"]));
    assert!(out.contains("mAR"));
    assert!(fs::read_to_string(d.join("ev/report.tsv")).unwrap().starts_with("class\trecall"));
}

#[test]
fn crf_with_zero_weight_matches_forest() {
    let dir = setup();
    let d = dir.path();
    ok(&hoiseg(d, &["synth", "--count", "2", "--out", "data"]));
    ok(&hoiseg(d, &["train", "--manifest", "data/manifest.txt", "--model", "model.rdf"]));
    let base = ["predict", "--model", "model.rdf", "--depth", "data/frames/000001.dpth", "--out"];
    ok(&hoiseg(d, &[&base[..], &["plain.lbls"]].concat()));
    ok(&hoiseg(d, &[&base[..], &["zero.lbls", "--crf", "--lambda", "0"]].concat()));
    assert_eq!(fs::read(d.join("plain.lbls")).unwrap(), fs::read(d.join("zero.lbls")).unwrap());
}

#[test]
fn experiment_writes_tables() {
    let dir = setup();
    let d = dir.path();
    let out = ok(&hoiseg(d, &["experiment", "noise", "--out", "exp", "--emit-plot-data"]));
    assert!(out.starts_with("sigma\tmAR\tmAP"));
    assert_eq!(out.lines().count(), 3);
    assert!(fs::read_to_string(d.join("exp/noise.plot.tsv")).unwrap().starts_with("x\ty\tseries"));
    let out = ok(&hoiseg(d, &["experiment", "modeling", "--out", "exp"]));
    assert!(out.contains("non-modeled") && out.lines().count() == 5);
}

#[test]
fn exit_codes() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(hoiseg(d, &["experiment", "bogus", "--out", "x"]).status.code(), Some(1));
    let o = hoiseg(d, &["experiment", "bogus", "--out", "x"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("noise, split, modeling"));
    assert_eq!(hoiseg(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(hoiseg(d, &["--set", "colour=red", "config"]).status.code(), Some(1));
    assert_eq!(hoiseg(d, &["train", "--manifest", "missing.txt", "--model", "m"]).status.code(), Some(2));
    assert_eq!(hoiseg(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn config_echo_round_trips() {
    let dir = setup();
    let d = dir.path();
    let dumped = ok(&hoiseg(d, &["--set", "trees=3", "config"]));
    fs::write(d.join("echo.conf"), &dumped).unwrap();
    let again = Command::new(env!("CARGO_BIN_EXE_hoiseg")).current_dir(d).args(["--config", "echo.conf", "config"]).output().unwrap();
    assert_eq!(ok(&again), dumped);
    assert!(dumped.contains("trees = 3"));
}

#[test]
fn empty_synth_gives_empty_manifest() {
    let dir = setup();
    let d = dir.path();
    ok(&hoiseg(d, &["synth", "--count", "0", "--out", "none"]));
    let m = fs::read_to_string(d.join("none/manifest.txt")).unwrap();
    assert_eq!(m.lines().filter(|l| !l.starts_with('#')).count(), 0);
}
