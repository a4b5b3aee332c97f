use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_graphwatch")
}

/// Run the CLI with the given arguments, isolated from ambient env config.
pub fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .env_remove("GRAPHWATCH_CONFIG")
        .output()
        .expect("failed to launch graphwatch")
}

pub fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// A fresh scratch directory under the target tmp root.
pub fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("graphwatch-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Overrides that keep end-to-end runs fast in tests.
pub fn fast_overrides(data: &Path, out: &Path) -> Vec<String> {
    vec![
        format!("data_dir={}", data.display()),
        format!("out_dir={}", out.display()),
        "t_steps=30".into(),
        "nodes=16".into(),
        "view_dims=3,3".into(),
        "anomalies=15-17".into(),
        "dgi_epochs=25".into(),
        "gnn_hidden=8".into(),
        "trees=8".into(),
        "capacity=64".into(),
        "shingle=2".into(),
        "runs=2".into(),
    ]
}

pub fn run_with(args: &[&str], overrides: &[String]) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    for o in overrides {
        full.push(o);
    }
    run(&full)
}

/// All files in a directory keyed by name, with contents.
pub fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            out.insert(
                entry.file_name().into_string().unwrap(),
                fs::read(entry.path()).unwrap(),
            );
        }
    }
    out
}
