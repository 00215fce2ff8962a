//! ε-contamination robustness of a single Naive Bayes prediction.
//!
//! Both metrics report the largest contamination size ε for which every
//! distribution in the neighborhood still predicts the model's class ĉ.
//!
//! * Global: the joint `p(c, f)` is replaced by `(1-ε)p + εq` for an
//!   arbitrary distribution `q` on `C × F`. The worst `q` is a point mass on
//!   `(c', f)` for the runner-up `c'`, so with `Δ = p(ĉ,f) - max_{c≠ĉ} p(c,f)`
//!   the answer is `Δ / (1 + Δ)`.
//! * Local: the prior and every per-class conditional are contaminated
//!   independently with one shared ε, which keeps the neighborhood inside the
//!   Naive Bayes family. The prediction survives ε iff, for every competitor
//!   `c'`, the fully lowered score of ĉ is at least the fully raised score of
//!   `c'`:
//!
//!   ```text
//!   (1-ε)^{N+1} prior(ĉ) Π_i p(f_i|ĉ)  ≥  [(1-ε)prior(c') + ε] Π_i [(1-ε)p(f_i|c') + ε]
//!   ```
//!
//!   The left side decreases and the right side increases in ε, so the flip
//!   point is found by bisection.
//!
//! The contamination of the prior in the local neighborhood and the single
//! shared ε are modelling choices of this crate.

use crate::error::{Error, Result};
use crate::nbc::{argmax, NaiveBayesModel};

pub const DEFAULT_EPS_TOL: f64 = 1e-10;
pub const MAX_BISECTION_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustnessScores {
    pub eps_glob: f64,
    pub eps_loc: f64,
}

fn require_two_classes(model: &NaiveBayesModel) -> Result<()> {
    if model.class_count() < 2 {
        return Err(Error::InvalidArgument(
            "robustness needs at least two classes".into(),
        ));
    }
    Ok(())
}

/// `(ĉ, runner-up)` by log joint score, ties resolved to the lowest index.
fn top_two(log_scores: &[f64]) -> (usize, usize) {
    let best = argmax(log_scores);
    let mut second = if best == 0 { 1 } else { 0 };
    for (c, &s) in log_scores.iter().enumerate() {
        if c != best && s > log_scores[second] {
            second = c;
        }
    }
    (best, second)
}

/// Global ε-contamination robustness `Δ / (1 + Δ)`.
pub fn eps_global(model: &NaiveBayesModel, features: &[usize]) -> Result<f64> {
    require_two_classes(model)?;
    let scores = model.log_joint_scores(features)?;
    let (best, second) = top_two(&scores);
    if scores[best] <= scores[second] {
        return Ok(0.0);
    }
    let delta = scores[best].exp() - scores[second].exp();
    if !(delta > 0.0) {
        return Ok(0.0);
    }
    Ok(delta / (1.0 + delta))
}

/// Evaluates the local robustness predicate at `eps` for prediction `best`.
/// Works in log space; `eps` must lie in `[0, 1)`.
pub fn local_predicate(model: &NaiveBayesModel, features: &[usize], best: usize, eps: f64) -> bool {
    let keep = 1.0 - eps;
    let ln_keep = keep.ln();
    // A single-category feature has conditional 1 whatever the contamination.
    let free: Vec<usize> = (0..features.len())
        .filter(|&i| model.domain().cardinality(i) > 1)
        .collect();

    let mut lowered = (free.len() as f64 + 1.0) * ln_keep + model.class_prior()[best].ln();
    for &i in &free {
        lowered += model.conditional(i, best, features[i]).ln();
    }
    (0..model.class_count()).filter(|&c| c != best).all(|c| {
        let mut raised = (keep * model.class_prior()[c] + eps).ln();
        for &i in &free {
            raised += (keep * model.conditional(i, c, features[i]) + eps).ln();
        }
        lowered >= raised
    })
}

/// Local ε-contamination robustness located by bisection to within `tol`.
///
/// Returns exactly `0.0` when ĉ ties with a competitor. Otherwise the result
/// is the lower end of the final bracket, so the predicate holds there.
pub fn eps_local(model: &NaiveBayesModel, features: &[usize], tol: f64) -> Result<f64> {
    require_two_classes(model)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let scores = model.log_joint_scores(features)?;
    let (best, second) = top_two(&scores);
    if scores[best] <= scores[second] {
        return Ok(0.0);
    }

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if local_predicate(model, features, best, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn robustness_scores(
    model: &NaiveBayesModel,
    features: &[usize],
    tol: f64,
) -> Result<RobustnessScores> {
    Ok(RobustnessScores {
        eps_glob: eps_global(model, features)?,
        eps_loc: eps_local(model, features, tol)?,
    })
}

/// Brute-force references for the robustness metrics.
///
/// These sweep an ε grid and enumerate adversarial contaminations directly
/// instead of using the closed form or the monotone predicate. They are slow
/// and meant for tests on small models.
pub mod oracle {
    use crate::nbc::{argmax, NaiveBayesModel};

    fn grid_points(resolution: f64) -> impl Iterator<Item = f64> {
        let steps = (1.0 / resolution).floor() as usize;
        (0..steps).map(move |k| k as f64 * resolution)
    }

    /// Largest grid ε (scanning upward from 0) before the first ε at which
    /// some point-mass contamination of the joint makes another class score
    /// at least as high as the prediction.
    pub fn oracle_eps_global(model: &NaiveBayesModel, features: &[usize], resolution: f64) -> f64 {
        let k = model.class_count();
        let joint: Vec<f64> = (0..k)
            .map(|c| model.joint_score(c, features).expect("valid features"))
            .collect();
        let best = argmax(&joint);
        // Candidate contaminants: a point mass on (c, f) for every class, plus
        // one on any cell outside this feature vector.
        let flips = |eps: f64| {
            let targets = (0..k).map(Some).chain(std::iter::once(None));
            targets.into_iter().any(|target| {
                let contaminated =
                    |c: usize| (1.0 - eps) * joint[c] + if target == Some(c) { eps } else { 0.0 };
                (0..k).any(|c| c != best && contaminated(c) >= contaminated(best))
            })
        };
        let mut last = 0.0;
        for eps in grid_points(resolution) {
            if flips(eps) {
                break;
            }
            last = eps;
        }
        last
    }

    /// Every assignment of one category per feature, i.e. every vertex
    /// combination of one class's conditional contaminations.
    fn vertex_assignments(cards: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for &card in cards {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..card).map(move |v| {
                        let mut next = prefix.clone();
                        next.push(v);
                        next
                    })
                })
                .collect();
        }
        out
    }

    /// Largest grid ε before the first flip, enumerating point-mass
    /// contaminations of the prior (one per class) and of every per-class
    /// conditional (one per category) and checking each competitor against
    /// the prediction.
    pub fn oracle_eps_local(model: &NaiveBayesModel, features: &[usize], resolution: f64) -> f64 {
        assert!(model.class_count() >= 2, "needs at least two classes");
        let k = model.class_count();
        let cards = model.domain().cardinalities();
        let vertices = vertex_assignments(&cards);
        let best = model.predict(features).expect("valid features");

        // Score of class `c` when its conditionals put their contamination on
        // `vertex` and the prior puts it on `prior_vertex`.
        let score = |c: usize, prior_vertex: usize, vertex: &[usize], eps: f64| {
            let keep = 1.0 - eps;
            let mut s = keep * model.class_prior()[c] + if prior_vertex == c { eps } else { 0.0 };
            for (i, &v) in features.iter().enumerate() {
                s *= keep * model.conditional(i, c, v) + if vertex[i] == v { eps } else { 0.0 };
            }
            s
        };
        let flips = |eps: f64| {
            (0..k).any(|prior_vertex| {
                let lowest_best = vertices
                    .iter()
                    .map(|v| score(best, prior_vertex, v, eps))
                    .fold(f64::INFINITY, f64::min);
                (0..k).filter(|&c| c != best).any(|c| {
                    vertices
                        .iter()
                        .any(|v| score(c, prior_vertex, v, eps) >= lowest_best)
                })
            })
        };
        let mut last = 0.0;
        for eps in grid_points(resolution) {
            if flips(eps) {
                break;
            }
            last = eps;
        }
        last
    }
}
