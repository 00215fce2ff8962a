//! Accuracy-rejection curves and their area (AU-ARC).
//!
//! An order lists instances least reliable first. Rejecting the first `k`
//! of them leaves `n - k` instances whose accuracy is the `k`-th curve point,
//! for `k = 0 .. n-1`; the empty retained set is not a point. AU-ARC is the
//! plain mean of those `n` accuracies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ranking::RankOrder;
use crate::robustness::RobustnessScores;
use crate::uncertainty::UncertaintyScores;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UncertaintyMetric {
    MaxProb,
    Entropy,
    Total,
    Aleatoric,
    Epistemic,
}

impl UncertaintyMetric {
    pub const ALL: [UncertaintyMetric; 5] = [
        UncertaintyMetric::MaxProb,
        UncertaintyMetric::Entropy,
        UncertaintyMetric::Total,
        UncertaintyMetric::Aleatoric,
        UncertaintyMetric::Epistemic,
    ];

    pub fn id(self) -> &'static str {
        match self {
            UncertaintyMetric::MaxProb => "u_m",
            UncertaintyMetric::Entropy => "u_H",
            UncertaintyMetric::Total => "u_t",
            UncertaintyMetric::Aleatoric => "u_a",
            UncertaintyMetric::Epistemic => "u_e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RobustnessMetric {
    Global,
    Local,
}

impl RobustnessMetric {
    pub const ALL: [RobustnessMetric; 2] = [RobustnessMetric::Global, RobustnessMetric::Local];

    pub fn id(self) -> &'static str {
        match self {
            RobustnessMetric::Global => "eps_glob",
            RobustnessMetric::Local => "eps_loc",
        }
    }
}

impl fmt::Display for UncertaintyMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl fmt::Display for RobustnessMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for UncertaintyMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown uncertainty metric `{s}`")))
    }
}

impl FromStr for RobustnessMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown robustness metric `{s}`")))
    }
}

/// Everything known about one evaluated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityRecord {
    pub index: usize,
    pub predicted: usize,
    pub actual: usize,
    pub correct: bool,
    pub uncertainty: UncertaintyScores,
    pub robustness: RobustnessScores,
}

impl ReliabilityRecord {
    pub fn new(
        index: usize,
        predicted: usize,
        actual: usize,
        uncertainty: UncertaintyScores,
        robustness: RobustnessScores,
    ) -> Self {
        Self {
            index,
            predicted,
            actual,
            correct: predicted == actual,
            uncertainty,
            robustness,
        }
    }

    pub fn uncertainty_score(&self, metric: UncertaintyMetric) -> f64 {
        let u = &self.uncertainty;
        match metric {
            UncertaintyMetric::MaxProb => u.max_prob,
            UncertaintyMetric::Entropy => u.entropy,
            UncertaintyMetric::Total => u.total,
            UncertaintyMetric::Aleatoric => u.aleatoric,
            UncertaintyMetric::Epistemic => u.epistemic,
        }
    }

    pub fn robustness_score(&self, metric: RobustnessMetric) -> f64 {
        match metric {
            RobustnessMetric::Global => self.robustness.eps_glob,
            RobustnessMetric::Local => self.robustness.eps_loc,
        }
    }
}

pub fn uncertainty_column(records: &[ReliabilityRecord], metric: UncertaintyMetric) -> Vec<f64> {
    records
        .iter()
        .map(|r| r.uncertainty_score(metric))
        .collect()
}

pub fn robustness_column(records: &[ReliabilityRecord], metric: RobustnessMetric) -> Vec<f64> {
    records.iter().map(|r| r.robustness_score(metric)).collect()
}

pub fn correctness(records: &[ReliabilityRecord]) -> Vec<bool> {
    records.iter().map(|r| r.correct).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRejectionCurve {
    /// Entry `k` is the accuracy after rejecting the first `k` instances.
    pub accuracies: Vec<f64>,
    pub auarc: f64,
}

impl AccuracyRejectionCurve {
    pub fn len(&self) -> usize {
        self.accuracies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accuracies.is_empty()
    }
}

pub fn arc(order: &RankOrder, correct: &[bool]) -> Result<AccuracyRejectionCurve> {
    let n = correct.len();
    if order.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: order.len(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "accuracy-rejection curve of zero instances".into(),
        ));
    }
    let mut remaining_correct = correct.iter().filter(|&&c| c).count();
    let mut accuracies = Vec::with_capacity(n);
    for (k, &idx) in order.order().iter().enumerate() {
        accuracies.push(remaining_correct as f64 / (n - k) as f64);
        if correct[idx] {
            remaining_correct -= 1;
        }
    }
    let auarc = mean(&accuracies);
    Ok(AccuracyRejectionCurve { accuracies, auarc })
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean of the curve's accuracies.
pub fn au_arc(curve: &AccuracyRejectionCurve) -> f64 {
    mean(&curve.accuracies)
}

/// AU-ARC of `order` without materializing the curve.
pub fn auarc_of(order: &RankOrder, correct: &[bool]) -> Result<f64> {
    Ok(arc(order, correct)?.auarc)
}

/// Misclassified instances first, each group by ascending index.
pub fn ideal_order(correct: &[bool]) -> RankOrder {
    let wrong = (0..correct.len()).filter(|&i| !correct[i]);
    let right = (0..correct.len()).filter(|&i| correct[i]);
    RankOrder::from_order(wrong.chain(right).collect()).expect("partition of 0..n")
}
