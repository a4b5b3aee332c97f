//! Evaluation metrics: accuracy, Macro-F1, ROC curves, AUC, and the
//! multi-run evaluation report.

use crate::error::{Error, Result};
use crate::pipeline::report::{EvalReport, RunMetrics};
use crate::pipeline::LabeledSeries;
use crate::rrcf::ScoreSeries;

/// Which classes enter the Macro-F1 average.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassSet {
    /// Average over the classes present in the truth labels (default).
    FromTruth,
    /// Average over exactly these classes; a class absent from both
    /// prediction and truth contributes F1 = 0.
    Explicit(Vec<usize>),
}

/// Rule for turning scores into hard labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// Flag scores strictly above the q-quantile (default q = 0.95).
    Quantile(f64),
    /// Flag scores strictly above a fixed value.
    Fixed(f64),
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Quantile(0.95)
    }
}

/// Fraction of exact matches.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("accuracy of empty labels".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Unweighted mean of per-class F1 scores.
pub fn macro_f1(pred: &[usize], truth: &[usize], classes: &ClassSet) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("macro-F1 of empty labels".into()));
    }
    let class_list: Vec<usize> = match classes {
        ClassSet::Explicit(list) => list.clone(),
        ClassSet::FromTruth => {
            let mut list: Vec<usize> = truth.to_vec();
            list.sort_unstable();
            list.dedup();
            list
        }
    };
    if class_list.is_empty() {
        return Err(Error::EmptyInput("macro-F1 with no classes".into()));
    }
    let mut total = 0.0;
    for &class in &class_list {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&p, &t) in pred.iter().zip(truth) {
            match (p == class, t == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        let denom = 2 * tp + fp + fn_;
        if denom > 0 {
            total += 2.0 * tp as f64 / denom as f64;
        }
        // tp = fp = fn = 0: class absent everywhere, F1 contributes 0.
    }
    Ok(total / class_list.len() as f64)
}

/// ROC curve points, threshold swept over unique score values descending
/// with ties crossing together. Starts at (0,0) and ends at (1,1).
pub fn roc_points(scores: &[f64], truth: &[bool]) -> Result<Vec<(f64, f64)>> {
    if scores.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: truth.len(),
        });
    }
    let positives = truth.iter().filter(|&&t| t).count();
    let negatives = truth.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateLabels);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut idx = 0;
    while idx < order.len() {
        let score = scores[order[idx]];
        while idx < order.len() && scores[order[idx]] == score {
            if truth[order[idx]] {
                tp += 1;
            } else {
                fp += 1;
            }
            idx += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    Ok(points)
}

/// Trapezoidal area under a valid ROC point list.
pub fn auc(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::MalformedCurve(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if points[0] != (0.0, 0.0) {
        return Err(Error::MalformedCurve("curve must start at (0,0)".into()));
    }
    if *points.last().unwrap() != (1.0, 1.0) {
        return Err(Error::MalformedCurve("curve must end at (1,1)".into()));
    }
    let mut area = 0.0;
    for pair in points.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if x1 < x0 || y1 < y0 {
            return Err(Error::MalformedCurve(format!(
                "non-monotone segment ({x0},{y0}) -> ({x1},{y1})"
            )));
        }
        area += (x1 - x0) * (y0 + y1) * 0.5;
    }
    Ok(area)
}

/// The threshold a rule resolves to on a concrete score vector.
pub fn resolve_threshold(scores: &[f64], rule: &ThresholdRule) -> Result<f64> {
    match *rule {
        ThresholdRule::Fixed(v) => {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "threshold".into(),
                    legal: "finite".into(),
                });
            }
            Ok(v)
        }
        ThresholdRule::Quantile(q) => {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "quantile".into(),
                    legal: "(0, 1)".into(),
                });
            }
            if scores.is_empty() {
                return Err(Error::EmptyInput("quantile of empty scores".into()));
            }
            let mut sorted = scores.to_vec();
            sorted.sort_by(f64::total_cmp);
            let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
            Ok(sorted[idx])
        }
    }
}

/// Hard labels: score strictly above the resolved threshold.
pub fn threshold_labels(scores: &[f64], rule: &ThresholdRule) -> Result<(Vec<bool>, f64)> {
    let threshold = resolve_threshold(scores, rule)?;
    Ok((scores.iter().map(|&s| s > threshold).collect(), threshold))
}

/// Chance-corrected agreement between two flat clusterings.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("ARI of empty labelings".into()));
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut contingency = vec![vec![0usize; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        contingency[x][y] += 1;
    }
    let choose2 = |n: usize| (n * n.saturating_sub(1)) as f64 / 2.0;
    let sum_ij: f64 = contingency
        .iter()
        .flat_map(|row| row.iter())
        .map(|&n| choose2(n))
        .sum();
    let sum_a: f64 = contingency
        .iter()
        .map(|row| choose2(row.iter().sum()))
        .sum();
    let sum_b: f64 = (0..kb)
        .map(|j| choose2(contingency.iter().map(|row| row[j]).sum()))
        .sum();
    let total = choose2(a.len());
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < 1e-15 {
        return Ok(1.0);
    }
    Ok((sum_ij - expected) / (max_index - expected))
}

/// Vertical average of ROC curves on the union FPR grid, preserving
/// vertical jumps via left/right limits so the trapezoidal area of the
/// average equals the mean of the per-curve areas exactly.
pub fn average_roc(curves: &[Vec<(f64, f64)>]) -> Result<Vec<(f64, f64)>> {
    if curves.is_empty() {
        return Err(Error::EmptyInput("average of no ROC curves".into()));
    }
    if curves.len() == 1 {
        return Ok(curves[0].clone());
    }
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.iter().map(|&(x, _)| x))
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let scale = 1.0 / curves.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(grid.len() * 2);
    for &x in &grid {
        let mut left = 0.0;
        let mut right = 0.0;
        for curve in curves {
            let (l, r) = limits_at(curve, x);
            left += l;
            right += r;
        }
        left *= scale;
        right *= scale;
        if out.last() != Some(&(x, left)) {
            out.push((x, left));
        }
        if right != left {
            out.push((x, right));
        }
    }
    Ok(out)
}

/// Left and right limits of a piecewise-linear ROC path at `x`. At a
/// vertical jump the limits differ; elsewhere they coincide with the
/// interpolated value.
fn limits_at(curve: &[(f64, f64)], x: f64) -> (f64, f64) {
    let first = curve.partition_point(|&(cx, _)| cx < x);
    if first < curve.len() && curve[first].0 == x {
        let mut last = first;
        while last + 1 < curve.len() && curve[last + 1].0 == x {
            last += 1;
        }
        return (curve[first].1, curve[last].1);
    }
    // x strictly between vertices (or at an endpoint shared by all curves).
    debug_assert!(first > 0 && first < curve.len(), "x outside [0,1] grid");
    let (x0, y0) = curve[first - 1];
    let (x1, y1) = curve[first];
    let t = (x - x0) / (x1 - x0);
    let y = y0 + t * (y1 - y0);
    (y, y)
}

/// Evaluate one or more runs (score series with matching truth labels)
/// under a threshold rule. Accuracy and Macro-F1 are averaged across runs;
/// the report's ROC is the vertical average of the per-run curves and its
/// AUC is that curve's trapezoidal area (equal to the mean per-run AUC).
pub fn evaluate(runs: &[(ScoreSeries, LabeledSeries)], rule: &ThresholdRule) -> Result<EvalReport> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("evaluate with no runs".into()));
    }
    let mut per_run = Vec::with_capacity(runs.len());
    let mut curves = Vec::with_capacity(runs.len());
    for (scores, truth) in runs {
        if scores.scores.len() != truth.labels.len() {
            return Err(Error::LengthMismatch {
                left: scores.scores.len(),
                right: truth.labels.len(),
            });
        }
        let (pred, threshold) = threshold_labels(&scores.scores, rule)?;
        let pred_ids: Vec<usize> = pred.iter().map(|&b| b as usize).collect();
        let truth_ids: Vec<usize> = truth.labels.iter().map(|&b| b as usize).collect();
        let acc = accuracy(&pred_ids, &truth_ids)?;
        let f1 = macro_f1(&pred_ids, &truth_ids, &ClassSet::FromTruth)?;
        let curve = roc_points(&scores.scores, &truth.labels)?;
        let run_auc = auc(&curve)?;
        per_run.push(RunMetrics {
            accuracy: acc,
            macro_f1: f1,
            auc: run_auc,
            threshold,
        });
        curves.push(curve);
    }
    let roc = average_roc(&curves)?;
    let mean_auc = auc(&roc)?;
    let n = per_run.len() as f64;
    Ok(EvalReport {
        accuracy: per_run.iter().map(|r| r.accuracy).sum::<f64>() / n,
        macro_f1: per_run.iter().map(|r| r.macro_f1).sum::<f64>() / n,
        auc: mean_auc,
        roc,
        runs: per_run.len(),
        per_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// Mann-Whitney statistic: probability a random positive outranks a
    /// random negative, ties counting one half. Independent oracle for AUC.
    fn mann_whitney(scores: &[f64], truth: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &ti) in truth.iter().enumerate() {
            if !ti {
                continue;
            }
            for (j, &tj) in truth.iter().enumerate() {
                if tj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 0], &[0, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 1, 0, 0], &[1, 0, 0, 0]).unwrap(), 0.75);
        assert!(matches!(
            accuracy(&[1], &[1, 0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn macro_f1_perfect_and_one_sided() {
        assert_eq!(
            macro_f1(&[0, 1, 0], &[0, 1, 0], &ClassSet::FromTruth).unwrap(),
            1.0
        );
        // Balanced binary truth, everything predicted class 0:
        // F1(0) = 2/3, F1(1) = 0, macro = 1/3.
        let got = macro_f1(&[0, 0, 0, 0], &[0, 0, 1, 1], &ClassSet::FromTruth).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn macro_f1_disjoint_classes_zero() {
        let got = macro_f1(&[2, 2, 2], &[0, 1, 0], &ClassSet::FromTruth).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn macro_f1_explicit_class_set_counts_absent_classes() {
        let from_truth = macro_f1(&[0, 0], &[0, 0], &ClassSet::FromTruth).unwrap();
        assert_eq!(from_truth, 1.0);
        let explicit = macro_f1(&[0, 0], &[0, 0], &ClassSet::Explicit(vec![0, 1])).unwrap();
        assert_eq!(explicit, 0.5);
    }

    #[test]
    fn roc_hand_swept_example() {
        let scores = [0.9, 0.8, 0.2, 0.1];
        let truth = [true, true, false, false];
        let points = roc_points(&scores, &truth).unwrap();
        assert_eq!(
            points,
            vec![(0.0, 0.0), (0.0, 0.5), (0.0, 1.0), (0.5, 1.0), (1.0, 1.0)]
        );
        assert_eq!(auc(&points).unwrap(), 1.0);
    }

    #[test]
    fn roc_all_ties_is_diagonal() {
        let scores = [0.5, 0.5, 0.5, 0.5];
        let truth = [true, false, true, false];
        let points = roc_points(&scores, &truth).unwrap();
        assert_eq!(points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auc(&points).unwrap(), 0.5);
    }

    #[test]
    fn roc_anti_perfect_scores() {
        let scores = [0.1, 0.2, 0.8, 0.9];
        let truth = [true, true, false, false];
        let points = roc_points(&scores, &truth).unwrap();
        assert_eq!(auc(&points).unwrap(), 0.0);
    }

    #[test]
    fn roc_degenerate_labels() {
        assert!(matches!(
            roc_points(&[0.1, 0.2], &[true, true]),
            Err(Error::DegenerateLabels)
        ));
    }

    #[test]
    fn auc_rejects_malformed_curves() {
        assert!(auc(&[(0.0, 0.0)]).is_err());
        assert!(auc(&[(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(auc(&[(0.0, 0.0), (0.5, 0.9), (0.4, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn auc_matches_mann_whitney_on_fuzz() {
        let mut rng = Rng::new(314);
        for case in 0..300 {
            let n = 4 + rng.index(40);
            let mut scores = Vec::with_capacity(n);
            let mut truth = Vec::with_capacity(n);
            for _ in 0..n {
                // Coarse grid to force plenty of ties.
                scores.push((rng.index(8) as f64) / 4.0);
                truth.push(rng.bernoulli(0.4));
            }
            if !truth.iter().any(|&t| t) || truth.iter().all(|&t| t) {
                continue;
            }
            let points = roc_points(&scores, &truth).unwrap();
            let got = auc(&points).unwrap();
            let want = mann_whitney(&scores, &truth);
            assert!(
                (got - want).abs() <= 1e-9,
                "case {case}: auc {got} vs mann-whitney {want}"
            );
        }
    }

    #[test]
    fn metrics_invariant_under_joint_permutation() {
        let mut rng = Rng::new(8);
        let scores: Vec<f64> = (0..30).map(|_| rng.next_f64()).collect();
        let truth: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let base = auc(&roc_points(&scores, &truth).unwrap()).unwrap();

        let perm = rng.permutation(30);
        let p_scores: Vec<f64> = perm.iter().map(|&i| scores[i]).collect();
        let p_truth: Vec<bool> = perm.iter().map(|&i| truth[i]).collect();
        let permuted = auc(&roc_points(&p_scores, &p_truth).unwrap()).unwrap();
        assert_eq!(base, permuted);
    }

    #[test]
    fn quantile_threshold_counts() {
        let scores: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let (labels, threshold) =
            threshold_labels(&scores, &ThresholdRule::Quantile(0.95)).unwrap();
        assert_eq!(threshold, 95.0);
        assert_eq!(labels.iter().filter(|&&l| l).count(), 5);

        let (fixed, _) = threshold_labels(&scores, &ThresholdRule::Fixed(50.0)).unwrap();
        assert_eq!(fixed.iter().filter(|&&l| l).count(), 50);
    }

    #[test]
    fn ari_perfect_and_random() {
        assert_eq!(
            adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(),
            1.0
        );
        let ari = adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert!(
            ari < 0.01,
            "independent split should score near 0, got {ari}"
        );
    }

    #[test]
    fn average_roc_preserves_mean_auc() {
        let a = vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        let b = vec![(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)];
        let avg = average_roc(&[a.clone(), b.clone()]).unwrap();
        let mean = (auc(&a).unwrap() + auc(&b).unwrap()) / 2.0;
        assert!((auc(&avg).unwrap() - mean).abs() < 1e-12);
        // Monotone with exact endpoints.
        assert_eq!(avg[0], (0.0, 0.0));
        assert_eq!(*avg.last().unwrap(), (1.0, 1.0));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            /// Trapezoidal AUC equals the Mann-Whitney statistic, and the
            /// curve produced by roc_points always satisfies the ROC
            /// invariants (monotone, exact endpoints) that auc() enforces.
            #[test]
            fn auc_is_mann_whitney(
                raw in prop::collection::vec((0usize..6, prop::bool::ANY), 3..40)
            ) {
                let scores: Vec<f64> = raw.iter().map(|&(s, _)| s as f64 / 3.0).collect();
                let truth: Vec<bool> = raw.iter().map(|&(_, t)| t).collect();
                prop_assume!(truth.iter().any(|&t| t) && !truth.iter().all(|&t| t));
                let points = roc_points(&scores, &truth).unwrap();
                let got = auc(&points).unwrap();
                let want = mann_whitney(&scores, &truth);
                prop_assert!((got - want).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn evaluate_thresholded_truth_gives_perfect_accuracy() {
        let scores = ScoreSeries {
            timestamps: (0..10).collect(),
            scores: (0..10).map(|i| i as f64).collect(),
        };
        let rule = ThresholdRule::Quantile(0.8);
        let (labels, _) = threshold_labels(&scores.scores, &rule).unwrap();
        let truth = LabeledSeries {
            timestamps: (0..10).collect(),
            labels,
        };
        let report = evaluate(&[(scores, truth)], &rule).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.runs, 1);
        assert_eq!(report.per_run[0].accuracy, 1.0);
        // Single run: averages equal the per-run values.
        assert_eq!(report.auc, report.per_run[0].auc);
    }
}
