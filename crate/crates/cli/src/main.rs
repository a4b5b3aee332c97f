//! graphwatch: anomaly-event detection over multi-source dynamic graphs.
//!
//! Subcommands map one-to-one onto pipeline stages; each reads the dataset
//! directory, writes its artifacts (config echo first), and exits 0 on
//! success, 1 on configuration errors, 2 on runtime errors.

mod commands;
mod config;

use commands::ArtifactSink;
use config::parse_config;

const USAGE: &str = "usage: graphwatch <subcommand> [--config <file>] [key=value ...]

subcommands:
  gen         write a synthetic dataset into data_dir
  cluster     spectral-cluster the full feature space -> cluster_labels.csv
  fuse-score  per-sample cross-view consistency scores -> consistency.csv
  embed       per-snapshot embeddings -> embeddings.csv + dgi_model.txt
  detect      per-timestep anomaly scores -> scores.csv (+ consistency.csv)
  eval        repeated evaluation -> report.json
  roc         ROC curve of scores vs timestep labels -> roc.csv

The config file is flat `key = value` text; inline key=value arguments
override it. GRAPHWATCH_CONFIG sets the config path when --config is absent.
Every artifact directory receives run_config.txt, the fully-resolved
configuration that reproduces the run.";

fn run(args: &[String]) -> i32 {
    let Some(subcommand) = args.first() else {
        eprintln!("{USAGE}");
        return 1;
    };
    let command: fn(&config::RunConfig, &mut ArtifactSink) -> graphwatch_core::Result<()> =
        match subcommand.as_str() {
            "gen" => commands::cmd_gen,
            "cluster" => commands::cmd_cluster,
            "fuse-score" => commands::cmd_fuse_score,
            "embed" => commands::cmd_embed,
            "detect" => commands::cmd_detect,
            "eval" => commands::cmd_eval,
            "roc" => commands::cmd_roc,
            other => {
                eprintln!("graphwatch: unknown subcommand '{other}'\n{USAGE}");
                return 1;
            }
        };

    let mut config_path: Option<String> = None;
    let mut overrides: Vec<String> = Vec::new();
    let mut rest = args[1..].iter();
    while let Some(arg) = rest.next() {
        if arg == "--config" {
            match rest.next() {
                Some(path) => config_path = Some(path.clone()),
                None => {
                    eprintln!("graphwatch: --config requires a path\n{USAGE}");
                    return 1;
                }
            }
        } else if arg.contains('=') {
            overrides.push(arg.clone());
        } else {
            eprintln!("graphwatch: unexpected argument '{arg}'\n{USAGE}");
            return 1;
        }
    }

    let config = match parse_config(config_path.as_deref(), &overrides) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("graphwatch: {e}");
            return 1;
        }
    };

    let mut sink = ArtifactSink::new();
    match command(&config, &mut sink) {
        Ok(()) => 0,
        Err(e) => {
            sink.discard_partial();
            eprintln!("graphwatch: {e}");
            2
        }
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}
