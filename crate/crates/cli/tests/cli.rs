//! Behavioral tests of the graphwatch binary: exit codes, artifacts, error
//! tagging, and stage composability.

mod common;

use std::fs;

use common::{dir_contents, fast_overrides, run, run_with, scratch, stderr};

#[test]
fn no_arguments_prints_usage_and_exits_one() {
    let output = run(&[]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("usage"));
}

#[test]
fn unknown_subcommand_exits_one_with_usage() {
    let output = run(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(1));
    let err = stderr(&output);
    assert!(err.contains("unknown subcommand"));
    assert!(err.contains("usage"));
}

#[test]
fn invalid_sigma_is_a_validation_error() {
    let output = run(&["gen", "sigma=-1"]);
    assert_eq!(output.status.code(), Some(1));
    let err = stderr(&output);
    assert!(err.contains("sigma"), "stderr: {err}");
    assert!(err.contains("(0, \u{221e})"), "stderr: {err}");
}

#[test]
fn bad_override_token_exits_one() {
    let output = run(&["gen", "--config"]);
    assert_eq!(output.status.code(), Some(1));
    let output = run(&["gen", "positional"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn missing_config_file_exits_one() {
    let output = run(&["gen", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("cannot read config"));
}

#[test]
fn gen_writes_dataset_with_echo_first() {
    let root = scratch("gen");
    let data = root.join("data");
    let overrides = fast_overrides(&data, &root.join("out"));
    let output = run_with(&["gen"], &overrides);
    assert_eq!(output.status.code(), Some(0), "stderr: {}", stderr(&output));
    for file in [
        "run_config.txt",
        "view00.csv",
        "view01.csv",
        "edges.csv",
        "labels_timesteps.csv",
        "labels_samples.csv",
    ] {
        assert!(data.join(file).exists(), "missing {file}");
    }
    let echo = fs::read_to_string(data.join("run_config.txt")).unwrap();
    assert!(echo.contains("t_steps = 30"));
    assert!(echo.contains("derived stage seeds"));
    fs::remove_dir_all(&root).unwrap();
}

#[test]
fn full_chain_produces_all_artifacts() {
    let root = scratch("chain");
    let data = root.join("data");
    let out = root.join("out");
    let overrides = fast_overrides(&data, &out);

    for (command, artifact) in [
        ("gen", "edges.csv"),
        ("cluster", "cluster_labels.csv"),
        ("fuse-score", "consistency.csv"),
        ("embed", "embeddings.csv"),
        ("detect", "scores.csv"),
        ("eval", "report.json"),
        ("roc", "roc.csv"),
    ] {
        let output = run_with(&[command], &overrides);
        assert_eq!(
            output.status.code(),
            Some(0),
            "{command} failed: {}",
            stderr(&output)
        );
        let dir = if command == "gen" { &data } else { &out };
        assert!(dir.join(artifact).exists(), "{command} missing {artifact}");
    }

    // The embed stage also persists the trained model.
    assert!(out.join("dgi_model.txt").exists());

    // The report carries both tasks and averaged metrics.
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"temporal\""));
    assert!(report.contains("\"samples\""));
    assert!(report.contains("\"runs\": 2"));

    // ROC file looks like a curve.
    let roc = fs::read_to_string(out.join("roc.csv")).unwrap();
    assert!(roc.starts_with("fpr,tpr\n"));
    assert!(roc.lines().count() >= 3);
    fs::remove_dir_all(&root).unwrap();
}

#[test]
fn detect_on_mismatched_views_exits_two_naming_fusion() {
    let root = scratch("mismatch");
    let data = root.join("data");
    fs::create_dir_all(&data).unwrap();
    // Two views with different sample counts.
    fs::write(
        data.join("view00.csv"),
        "node_id,f0\n0,1.0\n1,2.0\n2,3.0\n3,1.5\n",
    )
    .unwrap();
    fs::write(data.join("view01.csv"), "node_id,f0\n0,1.0\n1,2.0\n").unwrap();
    fs::write(
        data.join("edges.csv"),
        "t,src,dst,weight\n0,0,1,1.0\n1,1,2,1.0\n",
    )
    .unwrap();
    let out = root.join("out");
    let overrides = vec![
        format!("data_dir={}", data.display()),
        format!("out_dir={}", out.display()),
        "shingle=1".into(),
    ];
    let output = run_with(&["detect"], &overrides);
    assert_eq!(output.status.code(), Some(2));
    let err = stderr(&output);
    assert!(
        err.contains("fusion"),
        "stderr should name the stage: {err}"
    );
    // Partial artifacts were removed.
    assert!(!out.join("scores.csv").exists());
    assert!(!out.join("run_config.txt").exists());
    fs::remove_dir_all(&root).unwrap();
}

#[test]
fn detect_equals_embed_plus_forest_scoring() {
    let root = scratch("compose");
    let data = root.join("data");
    let out_direct = root.join("direct");
    let out_embed = root.join("embed");
    let out_chained = root.join("chained");

    let gen = run_with(&["gen"], &fast_overrides(&data, &out_direct));
    assert_eq!(gen.status.code(), Some(0));

    let direct = run_with(&["detect"], &fast_overrides(&data, &out_direct));
    assert_eq!(direct.status.code(), Some(0), "{}", stderr(&direct));

    let embed = run_with(&["embed"], &fast_overrides(&data, &out_embed));
    assert_eq!(embed.status.code(), Some(0), "{}", stderr(&embed));

    let mut overrides = fast_overrides(&data, &out_chained);
    overrides.push(format!(
        "embeddings={}",
        out_embed.join("embeddings.csv").display()
    ));
    let chained = run_with(&["detect"], &overrides);
    assert_eq!(chained.status.code(), Some(0), "{}", stderr(&chained));

    let direct_scores = fs::read(out_direct.join("scores.csv")).unwrap();
    let chained_scores = fs::read(out_chained.join("scores.csv")).unwrap();
    assert_eq!(
        direct_scores, chained_scores,
        "chained scores differ from direct detect"
    );
    fs::remove_dir_all(&root).unwrap();
}

#[test]
fn config_file_and_env_are_honored() {
    let root = scratch("cfgfile");
    let data = root.join("data");
    let out = root.join("out");
    let config_path = root.join("run.cfg");
    let mut text = String::new();
    for line in fast_overrides(&data, &out) {
        let (k, v) = line.split_once('=').unwrap();
        text.push_str(&format!("{k} = {v}\n"));
    }
    text.push_str("trees = 5\n");
    fs::write(&config_path, text).unwrap();

    let output = run(&["gen", "--config", config_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let echo = fs::read_to_string(data.join("run_config.txt")).unwrap();
    assert!(echo.contains("trees = 5"));

    // Env var points at the config when --config is absent; inline
    // overrides still win.
    let output = std::process::Command::new(common::binary())
        .args(["gen", "trees=7"])
        .env("GRAPHWATCH_CONFIG", &config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let echo = fs::read_to_string(data.join("run_config.txt")).unwrap();
    assert!(echo.contains("trees = 7"));
    fs::remove_dir_all(&root).unwrap();
}

#[test]
fn echoed_config_reproduces_the_run() {
    let root = scratch("echo");
    let data = root.join("data");
    let out = root.join("out");
    let overrides = fast_overrides(&data, &out);
    assert_eq!(run_with(&["gen"], &overrides).status.code(), Some(0));
    let first = dir_contents(&data);

    // Rerun purely from the echoed config.
    let echo_path = root.join("echoed.cfg");
    fs::copy(data.join("run_config.txt"), &echo_path).unwrap();
    fs::remove_dir_all(&data).unwrap();
    let output = run(&["gen", "--config", echo_path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    assert_eq!(dir_contents(&data), first);
    fs::remove_dir_all(&root).unwrap();
}
