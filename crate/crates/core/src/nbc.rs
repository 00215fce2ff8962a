//! Categorical Naive Bayes with additive (Laplace/Dirichlet) smoothing,
//! cross-validated smoothing selection and bootstrap ensembles.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dataset::{DiscreteDataset, FeatureDomain};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Smoothing values tried by cross-validation unless configured otherwise.
pub const DEFAULT_SMOOTHING_GRID: [f64; 8] = [0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
pub const DEFAULT_ENSEMBLE_SIZE: usize = 25;
pub const DEFAULT_FOLDS: usize = 5;

/// Class distribution for one feature vector with its predicted class.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDistribution {
    pub probabilities: Vec<f64>,
    pub predicted: usize,
}

impl PosteriorDistribution {
    /// Wraps an already normalized vector; the prediction is the first maximum.
    pub fn new(probabilities: Vec<f64>) -> Self {
        let predicted = argmax(&probabilities);
        Self {
            probabilities,
            predicted,
        }
    }

    /// Normalizes unnormalized log scores after subtracting their maximum.
    pub fn from_log_scores(log_scores: &[f64]) -> Self {
        let predicted = argmax(log_scores);
        let max = log_scores[predicted];
        let weights: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
        let total: f64 = weights.iter().sum();
        Self {
            probabilities: weights.into_iter().map(|w| w / total).collect(),
            predicted,
        }
    }

    pub fn class_count(&self) -> usize {
        self.probabilities.len()
    }
}

/// Index of the first maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    domain: FeatureDomain,
    smoothing: f64,
    class_prior: Vec<f64>,
    /// `conditionals[feature][class][category]`
    conditionals: Vec<Vec<Vec<f64>>>,
    log_prior: Vec<f64>,
    log_conditionals: Vec<Vec<Vec<f64>>>,
}

impl NaiveBayesModel {
    /// Assembles a model from explicit tables. Every vector must be a
    /// strictly positive distribution (within 1e-9 of summing to one).
    pub fn from_parts(
        domain: FeatureDomain,
        class_prior: Vec<f64>,
        conditionals: Vec<Vec<Vec<f64>>>,
        smoothing: f64,
    ) -> Result<Self> {
        let check = |v: &[f64], what: &str| -> Result<()> {
            let sum: f64 = v.iter().sum();
            if v.iter().any(|&p| !(p > 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "{what} is not a positive distribution (sum {sum})"
                )));
            }
            Ok(())
        };
        if class_prior.len() != domain.class_count() {
            return Err(Error::LengthMismatch {
                expected: domain.class_count(),
                actual: class_prior.len(),
            });
        }
        check(&class_prior, "class prior")?;
        if conditionals.len() != domain.feature_count() {
            return Err(Error::LengthMismatch {
                expected: domain.feature_count(),
                actual: conditionals.len(),
            });
        }
        for (i, per_class) in conditionals.iter().enumerate() {
            if per_class.len() != domain.class_count() {
                return Err(Error::LengthMismatch {
                    expected: domain.class_count(),
                    actual: per_class.len(),
                });
            }
            for table in per_class {
                if table.len() != domain.cardinality(i) {
                    return Err(Error::LengthMismatch {
                        expected: domain.cardinality(i),
                        actual: table.len(),
                    });
                }
                check(table, "conditional")?;
            }
        }
        let log_prior = class_prior.iter().map(|p| p.ln()).collect();
        let log_conditionals = conditionals
            .iter()
            .map(|pc| {
                pc.iter()
                    .map(|t| t.iter().map(|p| p.ln()).collect())
                    .collect()
            })
            .collect();
        Ok(Self {
            domain,
            smoothing,
            class_prior,
            conditionals,
            log_prior,
            log_conditionals,
        })
    }

    pub fn domain(&self) -> &FeatureDomain {
        &self.domain
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn class_count(&self) -> usize {
        self.class_prior.len()
    }

    pub fn feature_count(&self) -> usize {
        self.conditionals.len()
    }

    pub fn class_prior(&self) -> &[f64] {
        &self.class_prior
    }

    /// `p(feature = category | class)`.
    pub fn conditional(&self, feature: usize, class: usize, category: usize) -> f64 {
        self.conditionals[feature][class][category]
    }

    pub fn conditional_table(&self, feature: usize, class: usize) -> &[f64] {
        &self.conditionals[feature][class]
    }

    pub fn check_features(&self, features: &[usize]) -> Result<()> {
        if features.len() != self.feature_count() {
            return Err(Error::LengthMismatch {
                expected: self.feature_count(),
                actual: features.len(),
            });
        }
        for (i, &v) in features.iter().enumerate() {
            let card = self.domain.cardinality(i);
            if v >= card {
                return Err(Error::OutOfDomain {
                    feature: i,
                    index: v,
                    cardinality: card,
                });
            }
        }
        Ok(())
    }

    fn log_joint_unchecked(&self, class: usize, features: &[usize]) -> f64 {
        features
            .iter()
            .enumerate()
            .fold(self.log_prior[class], |acc, (i, &v)| {
                acc + self.log_conditionals[i][class][v]
            })
    }

    /// `ln p(c, f)` for every class.
    pub fn log_joint_scores(&self, features: &[usize]) -> Result<Vec<f64>> {
        self.check_features(features)?;
        Ok((0..self.class_count())
            .map(|c| self.log_joint_unchecked(c, features))
            .collect())
    }

    /// `p(c, f) = prior(c) · Π_i p(f_i | c)`.
    pub fn joint_score(&self, class: usize, features: &[usize]) -> Result<f64> {
        self.check_features(features)?;
        if class >= self.class_count() {
            return Err(Error::InvalidArgument(format!(
                "class {class} outside {} classes",
                self.class_count()
            )));
        }
        Ok(self.log_joint_unchecked(class, features).exp())
    }

    pub fn posterior(&self, features: &[usize]) -> Result<PosteriorDistribution> {
        Ok(PosteriorDistribution::from_log_scores(
            &self.log_joint_scores(features)?,
        ))
    }

    pub fn predict(&self, features: &[usize]) -> Result<usize> {
        Ok(argmax(&self.log_joint_scores(features)?))
    }

    /// Fraction of instances whose predicted class equals the label.
    pub fn accuracy(&self, data: &DiscreteDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyDataset(data.name.clone()));
        }
        let mut correct = 0usize;
        for inst in &data.instances {
            if self.predict(&inst.features)? == inst.class {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    /// Plain-text table of every probability with 17 significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "smoothing {:.16e}", self.smoothing);
        for (c, p) in self.class_prior.iter().enumerate() {
            let _ = writeln!(out, "prior {c} {p:.16e}");
        }
        for (i, per_class) in self.conditionals.iter().enumerate() {
            for (c, table) in per_class.iter().enumerate() {
                for (v, p) in table.iter().enumerate() {
                    let _ = writeln!(out, "cond {i} {c} {v} {p:.16e}");
                }
            }
        }
        out
    }
}

/// Fits class prior and conditionals with additive smoothing `alpha`:
/// `prior(c) = (n_c + α) / (n + α|C|)` and
/// `p(v | c) = (n_{v,c} + α) / (n_c + α|F_i|)`.
pub fn train(data: &DiscreteDataset, alpha: f64) -> Result<NaiveBayesModel> {
    if data.is_empty() {
        return Err(Error::EmptyDataset(data.name.clone()));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "smoothing must be positive, got {alpha}"
        )));
    }
    let domain = &data.domain;
    let k = domain.class_count();
    let cards = domain.cardinalities();

    let mut class_counts = vec![0usize; k];
    let mut counts: Vec<Vec<Vec<usize>>> =
        cards.iter().map(|&card| vec![vec![0; card]; k]).collect();
    for inst in &data.instances {
        class_counts[inst.class] += 1;
        for (i, &v) in inst.features.iter().enumerate() {
            counts[i][inst.class][v] += 1;
        }
    }

    let n = data.len() as f64;
    let class_prior: Vec<f64> = class_counts
        .iter()
        .map(|&c| (c as f64 + alpha) / (n + alpha * k as f64))
        .collect();
    let conditionals: Vec<Vec<Vec<f64>>> = counts
        .iter()
        .zip(&cards)
        .map(|(per_class, &card)| {
            per_class
                .iter()
                .zip(&class_counts)
                .map(|(table, &nc)| {
                    let denom = nc as f64 + alpha * card as f64;
                    table.iter().map(|&x| (x as f64 + alpha) / denom).collect()
                })
                .collect()
        })
        .collect();

    NaiveBayesModel::from_parts(domain.clone(), class_prior, conditionals, alpha)
}

/// Seeded near-equal partition of `0..n` into `folds` groups.
pub fn fold_partition(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut indices: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut indices);
    let base = n / folds;
    let extra = n % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        out.push(indices[start..start + size].to_vec());
        start += size;
    }
    out
}

/// Mean held-out accuracy of `alpha` over a seeded `folds`-way partition.
/// Folds with no held-out instance are skipped.
pub fn cross_validated_accuracy(
    data: &DiscreteDataset,
    alpha: f64,
    folds: usize,
    cv_seed: u64,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let partition = fold_partition(data.len(), folds, cv_seed);
    let mut total = 0.0;
    let mut used = 0usize;
    for (f, held_out) in partition.iter().enumerate() {
        if held_out.is_empty() {
            continue;
        }
        let train_idx: Vec<usize> = partition
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        if train_idx.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "fold {f} leaves no training instances"
            )));
        }
        let model = train(&data.subset(&train_idx), alpha)?;
        total += model.accuracy(&data.subset(held_out))?;
        used += 1;
    }
    Ok(total / used as f64)
}

/// Grid value with the best cross-validated accuracy; ties go to the
/// smallest value.
pub fn select_smoothing(
    train_data: &DiscreteDataset,
    grid: &[f64],
    folds: usize,
    cv_seed: u64,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("smoothing grid is empty".into()));
    }
    if folds < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let scores: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&alpha| {
            Ok((
                alpha,
                cross_validated_accuracy(train_data, alpha, folds, cv_seed)?,
            ))
        })
        .collect::<Result<_>>()?;
    let mut best = scores[0];
    for &(alpha, acc) in &scores[1..] {
        if acc > best.1 || (acc == best.1 && alpha < best.0) {
            best = (alpha, acc);
        }
    }
    Ok(best.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEnsemble {
    pub members: Vec<NaiveBayesModel>,
    pub bootstrap_seed: u64,
}

impl ModelEnsemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn posteriors(&self, features: &[usize]) -> Result<Vec<PosteriorDistribution>> {
        self.members.iter().map(|m| m.posterior(features)).collect()
    }
}

/// `size` models, member `m` trained on a size-n resample drawn with
/// replacement from the stream seeded by `seed ^ m`.
pub fn bootstrap_ensemble(
    train_data: &DiscreteDataset,
    alpha: f64,
    size: usize,
    seed: u64,
) -> Result<ModelEnsemble> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!(
            "ensemble needs at least 2 members, got {size}"
        )));
    }
    if train_data.is_empty() {
        return Err(Error::EmptyDataset(train_data.name.clone()));
    }
    let n = train_data.len();
    let members = (0..size)
        .into_par_iter()
        .map(|m| {
            let mut rng = SeededRng::new(seed ^ m as u64);
            let idx: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
            train(&train_data.subset(&idx), alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelEnsemble {
        members,
        bootstrap_seed: seed,
    })
}
