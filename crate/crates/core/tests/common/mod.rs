#![allow(dead_code)]

use nbrel::dataset::FeatureDomain;
use nbrel::nbc::{NaiveBayesModel, PosteriorDistribution};
use nbrel::rng::SeededRng;

/// Strictly positive distribution of length `n`.
pub fn random_distribution(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.02 + rng.unit()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// Random model with at most the given number of classes, features and
/// categories per feature (at least two classes).
pub fn random_model(
    rng: &mut SeededRng,
    max_classes: usize,
    max_features: usize,
    max_categories: usize,
) -> NaiveBayesModel {
    let k = 2 + rng.below(max_classes - 1);
    let n = rng.below(max_features + 1);
    let cards: Vec<usize> = (0..n).map(|_| 1 + rng.below(max_categories)).collect();
    let prior = random_distribution(rng, k);
    let cond = cards
        .iter()
        .map(|&card| (0..k).map(|_| random_distribution(rng, card)).collect())
        .collect();
    NaiveBayesModel::from_parts(
        FeatureDomain::with_cardinalities(&cards, k),
        prior,
        cond,
        1.0,
    )
    .unwrap()
}

pub fn random_instance(rng: &mut SeededRng, model: &NaiveBayesModel) -> Vec<usize> {
    model
        .domain()
        .cardinalities()
        .iter()
        .map(|&c| rng.below(c))
        .collect()
}

/// Every feature vector of the model's domain.
pub fn all_instances(model: &NaiveBayesModel) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for card in model.domain().cardinalities() {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..card).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Posterior that is sometimes close to one-hot.
pub fn random_posterior(rng: &mut SeededRng, k: usize) -> PosteriorDistribution {
    let sharp = rng.below(4) == 0;
    let raw: Vec<f64> = (0..k)
        .map(|_| {
            let u = rng.unit();
            if sharp {
                u.powi(12)
            } else {
                u
            }
        })
        .map(|x| x + 1e-300)
        .collect();
    let total: f64 = raw.iter().sum();
    PosteriorDistribution::new(raw.iter().map(|x| x / total).collect())
}
