//! Evaluation: balanced error, misclassification error, per-class and
//! per-group breakdowns.
//!
//! The balanced error is the unweighted mean of per-class error rates over
//! the classes represented in the evaluation set; classes with no examples
//! are excluded from the mean and flagged in the report.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Frequency group of a class, assigned from training counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Many,
    Medium,
    Few,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Many => write!(f, "many"),
            Group::Medium => write!(f, "medium"),
            Group::Few => write!(f, "few"),
        }
    }
}

/// Evaluation summary for one set of predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub balanced_error: f64,
    pub misclassification_error: f64,
    /// Per-class error rates; `None` for classes absent from the evaluation set.
    pub per_class_errors: Vec<Option<f64>>,
    /// Example-weighted error per group, when a grouping was supplied.
    pub per_group_errors: Option<BTreeMap<Group, f64>>,
    pub n_per_class: Vec<u64>,
}

impl EvalReport {
    /// Classes that had no examples in the evaluation set.
    pub fn absent_classes(&self) -> Vec<usize> {
        self.n_per_class
            .iter()
            .enumerate()
            .filter(|(_, &n)| n == 0)
            .map(|(y, _)| y)
            .collect()
    }
}

/// Compares predictions against ground truth over `num_classes` classes.
pub fn evaluate(preds: &[usize], truth: &[usize], num_classes: usize) -> Result<EvalReport> {
    evaluate_impl(preds, truth, num_classes, None)
}

/// Like [`evaluate`], additionally breaking errors down by the given
/// per-class group assignment (example-weighted within each group, so the
/// group errors recompose the misclassification error).
pub fn evaluate_grouped(
    preds: &[usize],
    truth: &[usize],
    num_classes: usize,
    groups: &[Group],
) -> Result<EvalReport> {
    if groups.len() != num_classes {
        return Err(Error::LengthMismatch { expected: num_classes, got: groups.len() });
    }
    evaluate_impl(preds, truth, num_classes, Some(groups))
}

fn evaluate_impl(
    preds: &[usize],
    truth: &[usize],
    num_classes: usize,
    groups: Option<&[Group]>,
) -> Result<EvalReport> {
    if preds.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: preds.len() });
    }
    if preds.is_empty() {
        return Err(Error::InvalidParameter("need at least one example".into()));
    }
    let mut n_per_class = vec![0u64; num_classes];
    let mut wrong_per_class = vec![0u64; num_classes];
    let mut wrong_total = 0u64;
    for (&p, &t) in preds.iter().zip(truth) {
        if t >= num_classes {
            return Err(Error::LabelOutOfRange { label: t, num_classes });
        }
        if p >= num_classes {
            return Err(Error::LabelOutOfRange { label: p, num_classes });
        }
        n_per_class[t] += 1;
        if p != t {
            wrong_per_class[t] += 1;
            wrong_total += 1;
        }
    }

    let per_class_errors: Vec<Option<f64>> = n_per_class
        .iter()
        .zip(&wrong_per_class)
        .map(|(&n, &w)| if n > 0 { Some(w as f64 / n as f64) } else { None })
        .collect();
    let represented: Vec<f64> = per_class_errors.iter().flatten().copied().collect();
    let balanced_error = represented.iter().sum::<f64>() / represented.len() as f64;
    let misclassification_error = wrong_total as f64 / preds.len() as f64;

    let per_group_errors = groups.map(|groups| {
        let mut n_group: BTreeMap<Group, u64> = BTreeMap::new();
        let mut wrong_group: BTreeMap<Group, u64> = BTreeMap::new();
        for y in 0..num_classes {
            *n_group.entry(groups[y]).or_default() += n_per_class[y];
            *wrong_group.entry(groups[y]).or_default() += wrong_per_class[y];
        }
        n_group
            .into_iter()
            .filter(|&(_, n)| n > 0)
            .map(|(g, n)| (g, wrong_group[&g] as f64 / n as f64))
            .collect()
    });

    Ok(EvalReport {
        balanced_error,
        misclassification_error,
        per_class_errors,
        per_group_errors,
        n_per_class,
    })
}

/// Assigns each class to Many/Medium/Few from its training count.
/// `Many: count >= hi`, `Medium: lo <= count < hi`, `Few: count < lo`;
/// the boundary at exactly `hi` goes to Many. Defaults are `(100, 20)`.
pub fn group_classes(train_counts: &[u64], thresholds: (u64, u64)) -> Vec<Group> {
    let (hi, lo) = thresholds;
    train_counts
        .iter()
        .map(|&c| {
            if c >= hi {
                Group::Many
            } else if c >= lo {
                Group::Medium
            } else {
                Group::Few
            }
        })
        .collect()
}

/// The default Many/Medium/Few thresholds.
pub const DEFAULT_GROUP_THRESHOLDS: (u64, u64) = (100, 20);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let truth = vec![0, 1, 2, 1, 0];
        let report = evaluate(&truth, &truth, 3).unwrap();
        assert_eq!(report.balanced_error, 0.0);
        assert_eq!(report.misclassification_error, 0.0);
        assert!(report.per_class_errors.iter().all(|e| *e == Some(0.0)));
    }

    #[test]
    fn constant_majority_predictor_pathology() {
        // 90 examples of class 0, 10 of class 1, everything predicted 0.
        let mut truth = vec![0usize; 90];
        truth.extend(vec![1usize; 10]);
        let preds = vec![0usize; 100];
        let report = evaluate(&preds, &truth, 2).unwrap();
        assert_eq!(report.per_class_errors, vec![Some(0.0), Some(1.0)]);
        assert_eq!(report.balanced_error, 0.5);
        assert_eq!(report.misclassification_error, 0.1);
    }

    #[test]
    fn ber_invariant_under_class_replication() {
        let truth = vec![0, 0, 0, 1, 1, 2];
        let preds = vec![0, 0, 1, 1, 0, 2];
        let base = evaluate(&preds, &truth, 3).unwrap();

        // Duplicate every class-1 example.
        let mut truth2 = truth.clone();
        let mut preds2 = preds.clone();
        for (&t, &p) in truth.iter().zip(&preds) {
            if t == 1 {
                truth2.push(t);
                preds2.push(p);
            }
        }
        let doubled = evaluate(&preds2, &truth2, 3).unwrap();
        assert!((doubled.balanced_error - base.balanced_error).abs() <= 1e-12);
        assert_ne!(doubled.misclassification_error, base.misclassification_error);
    }

    #[test]
    fn absent_classes_are_excluded_and_flagged() {
        let truth = vec![0, 0, 1];
        let preds = vec![0, 1, 1];
        let report = evaluate(&preds, &truth, 3).unwrap();
        assert_eq!(report.per_class_errors[2], None);
        assert_eq!(report.absent_classes(), vec![2]);
        assert!((report.balanced_error - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_labels_and_lengths() {
        assert!(evaluate(&[0, 1], &[0], 2).is_err());
        assert!(evaluate(&[], &[], 2).is_err());
        assert!(evaluate(&[0, 2], &[0, 1], 2).is_err());
        assert!(evaluate(&[0, 1], &[0, 2], 2).is_err());
    }

    #[test]
    fn grouping_follows_thresholds() {
        assert_eq!(
            group_classes(&[500, 50, 5], DEFAULT_GROUP_THRESHOLDS),
            vec![Group::Many, Group::Medium, Group::Few]
        );
        assert_eq!(group_classes(&[100, 100], DEFAULT_GROUP_THRESHOLDS), vec![Group::Many; 2]);
        assert_eq!(group_classes(&[1, 7, 300], (1, 1)), vec![Group::Many; 3]);
        assert_eq!(group_classes(&[20, 19], DEFAULT_GROUP_THRESHOLDS), vec![Group::Medium, Group::Few]);
    }

    #[test]
    fn group_errors_recompose_misclassification() {
        let truth = vec![0, 0, 0, 0, 1, 1, 2, 2, 2];
        let preds = vec![0, 0, 1, 0, 1, 0, 2, 0, 1];
        let groups = vec![Group::Many, Group::Medium, Group::Few];
        let report = evaluate_grouped(&preds, &truth, 3, &groups).unwrap();

        let by_group = report.per_group_errors.as_ref().unwrap();
        let mut n_group: BTreeMap<Group, u64> = BTreeMap::new();
        for (y, g) in groups.iter().enumerate() {
            *n_group.entry(*g).or_default() += report.n_per_class[y];
        }
        let recomposed: f64 = by_group
            .iter()
            .map(|(g, e)| e * n_group[g] as f64)
            .sum::<f64>()
            / truth.len() as f64;
        assert!((recomposed - report.misclassification_error).abs() <= 1e-12);
    }

    #[test]
    fn per_class_errors_stay_in_unit_interval() {
        let truth = vec![0, 1, 0, 1, 0, 1, 1, 1];
        let preds = vec![1, 0, 1, 0, 0, 1, 1, 0];
        let report = evaluate(&preds, &truth, 2).unwrap();
        for e in report.per_class_errors.iter().flatten() {
            assert!((0.0..=1.0).contains(e));
        }
        // BER equals the mean of represented per-class errors.
        let mean: f64 = report.per_class_errors.iter().flatten().sum::<f64>() / 2.0;
        assert!((report.balanced_error - mean).abs() <= 1e-12);
    }
}
