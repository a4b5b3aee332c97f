//! Acceptance criterion 8: every command rerun with an identical
//! configuration produces byte-identical artifacts.

mod common;

use std::fs;

use common::{dir_contents, fast_overrides, run_with, scratch, stderr};

#[test]
fn criterion_8_determinism() {
    let root = scratch("acceptance-determinism");
    let data = root.join("data");
    let out = root.join("out");
    let overrides = fast_overrides(&data, &out);

    // gen twice: the dataset directory must be byte-identical.
    assert_eq!(run_with(&["gen"], &overrides).status.code(), Some(0));
    let first_data = dir_contents(&data);
    assert_eq!(run_with(&["gen"], &overrides).status.code(), Some(0));
    assert_eq!(dir_contents(&data), first_data, "gen is not deterministic");

    // Every downstream command twice over the same inputs and out_dir.
    for command in ["cluster", "fuse-score", "embed", "detect", "eval", "roc"] {
        let output = run_with(&[command], &overrides);
        assert_eq!(
            output.status.code(),
            Some(0),
            "{command} failed: {}",
            stderr(&output)
        );
        let first = dir_contents(&out);
        let output = run_with(&[command], &overrides);
        assert_eq!(output.status.code(), Some(0));
        assert_eq!(
            dir_contents(&out),
            first,
            "{command} rerun changed artifact bytes"
        );
    }

    fs::remove_dir_all(&root).unwrap();
    println!(
        "[acceptance] criterion 8 (determinism): PASS — gen/cluster/fuse-score/embed/detect/eval/roc rerun byte-identical"
    );
}
