//! Per-instance uncertainty scores: max-probability, Shannon entropy, and the
//! ensemble entropy decomposition into total, aleatoric and epistemic parts.
//! Entropies are in nats.

use crate::error::{Error, Result};
use crate::nbc::PosteriorDistribution;

/// Epistemic residue smaller than this is floating-point noise.
const EPISTEMIC_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyScores {
    pub max_prob: f64,
    pub entropy: f64,
    pub total: f64,
    pub aleatoric: f64,
    pub epistemic: f64,
}

/// Shannon entropy in nats with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    h.max(0.0)
}

/// `1 - max_c p(c | f)`.
pub fn max_prob_uncertainty(post: &PosteriorDistribution) -> f64 {
    let max = post
        .probabilities
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    (1.0 - max).max(0.0)
}

pub fn entropy_uncertainty(post: &PosteriorDistribution) -> f64 {
    entropy(&post.probabilities)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleUncertainty {
    pub total: f64,
    pub aleatoric: f64,
    pub epistemic: f64,
}

/// Entropy of the mean posterior (total), mean member entropy (aleatoric),
/// and their difference (epistemic, clamped at zero).
pub fn ensemble_uncertainties(posteriors: &[PosteriorDistribution]) -> Result<EnsembleUncertainty> {
    if posteriors.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "ensemble uncertainty needs at least 2 members, got {}",
            posteriors.len()
        )));
    }
    let k = posteriors[0].class_count();
    if let Some(bad) = posteriors.iter().find(|p| p.class_count() != k) {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: bad.class_count(),
        });
    }
    let m = posteriors.len() as f64;
    let mut mean = vec![0.0; k];
    for p in posteriors {
        for (acc, x) in mean.iter_mut().zip(&p.probabilities) {
            *acc += x;
        }
    }
    for x in &mut mean {
        *x /= m;
    }
    let total = entropy(&mean);
    let aleatoric = posteriors
        .iter()
        .map(|p| entropy(&p.probabilities))
        .sum::<f64>()
        / m;
    let diff = total - aleatoric;
    let epistemic = if diff.abs() < EPISTEMIC_CLAMP {
        0.0
    } else {
        diff.max(0.0)
    };
    Ok(EnsembleUncertainty {
        total: aleatoric + epistemic,
        aleatoric,
        epistemic,
    })
}

/// All five scores for one instance.
pub fn uncertainty_scores(
    single: &PosteriorDistribution,
    ensemble: &[PosteriorDistribution],
) -> Result<UncertaintyScores> {
    let e = ensemble_uncertainties(ensemble)?;
    Ok(UncertaintyScores {
        max_prob: max_prob_uncertainty(single),
        entropy: entropy_uncertainty(single),
        total: e.total,
        aleatoric: e.aleatoric,
        epistemic: e.epistemic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(p: &[f64]) -> PosteriorDistribution {
        PosteriorDistribution::new(p.to_vec())
    }

    // Scalar reference: h(p) = -p ln p.
    fn h(p: f64) -> f64 {
        if p == 0.0 {
            0.0
        } else {
            -p * p.ln()
        }
    }

    #[test]
    fn max_prob_examples() {
        assert_eq!(max_prob_uncertainty(&post(&[1.0, 0.0])), 0.0);
        assert!((max_prob_uncertainty(&post(&[0.7, 0.3])) - 0.3).abs() < 1e-15);
        assert!((max_prob_uncertainty(&post(&[0.25; 4])) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_uncertainty(&post(&[1.0, 0.0])), 0.0);
        assert!((entropy_uncertainty(&post(&[0.5, 0.5])) - 2f64.ln()).abs() < 1e-15);
        let expected = h(0.9) + h(0.1);
        assert!((expected - 0.325083).abs() < 5e-7);
        assert!((entropy_uncertainty(&post(&[0.9, 0.1])) - expected).abs() < 1e-15);
    }

    #[test]
    fn identical_members_have_no_epistemic_part() {
        let p = post(&[0.6, 0.3, 0.1]);
        let e = ensemble_uncertainties(&[p.clone(), p.clone(), p]).unwrap();
        assert_eq!(e.epistemic, 0.0);
        let hm = h(0.6) + h(0.3) + h(0.1);
        assert!((e.total - hm).abs() < 1e-12);
        assert!((e.aleatoric - hm).abs() < 1e-12);
    }

    #[test]
    fn opposite_certain_members() {
        let e = ensemble_uncertainties(&[post(&[1.0, 0.0]), post(&[0.0, 1.0])]).unwrap();
        assert!((e.total - 2f64.ln()).abs() < 1e-15);
        assert_eq!(e.aleatoric, 0.0);
        assert!((e.epistemic - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn two_member_decomposition() {
        let e = ensemble_uncertainties(&[post(&[0.8, 0.2]), post(&[0.6, 0.4])]).unwrap();
        let total = h(0.7) + h(0.3);
        let aleatoric = ((h(0.8) + h(0.2)) + (h(0.6) + h(0.4))) / 2.0;
        assert!((total - 0.610864).abs() < 5e-7);
        assert!((aleatoric - 0.586707).abs() < 5e-7);
        assert!((total - aleatoric - 0.024157).abs() < 5e-7);
        assert!((e.total - total).abs() < 1e-12);
        assert!((e.aleatoric - aleatoric).abs() < 1e-12);
        assert!((e.epistemic - (total - aleatoric)).abs() < 1e-12);
    }

    #[test]
    fn ensemble_errors() {
        assert!(ensemble_uncertainties(&[post(&[0.5, 0.5])]).is_err());
        assert!(matches!(
            ensemble_uncertainties(&[post(&[0.5, 0.5]), post(&[0.2, 0.3, 0.5])]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
