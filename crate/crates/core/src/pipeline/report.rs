//! Evaluation reports and their canonical JSON serialization.

use crate::fmt::fmt_f64;

/// Metrics of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub auc: f64,
    /// The resolved hard-label threshold used for accuracy/Macro-F1.
    pub threshold: f64,
}

/// Averaged metrics over one or more runs, with per-run values retained.
/// `roc` is the vertical average of the per-run curves and `auc` its
/// trapezoidal area.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub auc: f64,
    pub roc: Vec<(f64, f64)>,
    pub runs: usize,
    pub per_run: Vec<RunMetrics>,
}

/// Reports for the two detection tasks: timestep anomalies scored by the
/// temporal stream and sample inconsistencies scored by the fusion stream.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub temporal: EvalReport,
    pub samples: EvalReport,
}

fn push_indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

impl EvalReport {
    fn write_json(&self, out: &mut String, depth: usize) {
        out.push_str("{\n");
        push_indent(out, depth + 1);
        out.push_str(&format!("\"runs\": {},\n", self.runs));
        push_indent(out, depth + 1);
        out.push_str(&format!("\"accuracy\": {},\n", fmt_f64(self.accuracy)));
        push_indent(out, depth + 1);
        out.push_str(&format!("\"macro_f1\": {},\n", fmt_f64(self.macro_f1)));
        push_indent(out, depth + 1);
        out.push_str(&format!("\"auc\": {},\n", fmt_f64(self.auc)));
        push_indent(out, depth + 1);
        out.push_str("\"roc\": [");
        for (i, (fpr, tpr)) in self.roc.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("[{}, {}]", fmt_f64(*fpr), fmt_f64(*tpr)));
        }
        out.push_str("],\n");
        push_indent(out, depth + 1);
        out.push_str("\"per_run\": [\n");
        for (i, run) in self.per_run.iter().enumerate() {
            push_indent(out, depth + 2);
            out.push_str(&format!(
                "{{\"accuracy\": {}, \"macro_f1\": {}, \"auc\": {}, \"threshold\": {}}}",
                fmt_f64(run.accuracy),
                fmt_f64(run.macro_f1),
                fmt_f64(run.auc),
                fmt_f64(run.threshold)
            ));
            out.push_str(if i + 1 < self.per_run.len() {
                ",\n"
            } else {
                "\n"
            });
        }
        push_indent(out, depth + 1);
        out.push_str("]\n");
        push_indent(out, depth);
        out.push('}');
    }

    pub fn to_json(&self) -> String {
        let mut out = String::new();
        self.write_json(&mut out, 0);
        out.push('\n');
        out
    }
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        push_indent(&mut out, 1);
        out.push_str("\"temporal\": ");
        self.temporal.write_json(&mut out, 1);
        out.push_str(",\n");
        push_indent(&mut out, 1);
        out.push_str("\"samples\": ");
        self.samples.write_json(&mut out, 1);
        out.push_str("\n}\n");
        out
    }
}
