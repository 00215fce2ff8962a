//! Reliability orders and their weighted combination.
//!
//! Uncertainty scores are ranked high-to-low and robustness scores
//! low-to-high, so position 0 is always the least reliable instance. A hybrid
//! order sorts instances by `h_i = γ·n_{u,i} + (1-γ)·n_{ε,i}`, breaking ties
//! by higher uncertainty and then by lower index.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::arc::{auarc_of, correctness, robustness_column, uncertainty_column, ReliabilityRecord};
use crate::arc::{RobustnessMetric, UncertaintyMetric};
use crate::error::{Error, Result};

pub const DEFAULT_GAMMA_STEP: f64 = 0.01;

/// γ is resolved to this many parts so equal hybrid positions compare equal.
const GAMMA_SCALE: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOrder {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl RankOrder {
    /// Validates that `order` is a permutation of `0..order.len()`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (rank, &idx) in order.iter().enumerate() {
            if idx >= n || position[idx] != usize::MAX {
                return Err(Error::InvalidArgument(format!(
                    "order is not a permutation (instance {idx} at rank {rank})"
                )));
            }
            position[idx] = rank;
        }
        Ok(Self { order, position })
    }

    /// Instance indices, least reliable first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Rank of every instance (0-based).
    pub fn position(&self) -> &[usize] {
        &self.position
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

fn check_finite(scores: &[f64]) -> Result<()> {
    match scores.iter().position(|s| s.is_nan()) {
        Some(i) => Err(Error::NanScore(i)),
        None => Ok(()),
    }
}

/// Highest uncertainty first; equal scores keep ascending index.
pub fn order_by_uncertainty(scores: &[f64]) -> Result<RankOrder> {
    check_finite(scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    RankOrder::from_order(order)
}

/// Lowest robustness first; equal scores keep ascending index.
pub fn order_by_robustness(scores: &[f64]) -> Result<RankOrder> {
    check_finite(scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    RankOrder::from_order(order)
}

fn gamma_units(gamma: f64) -> u64 {
    (gamma * GAMMA_SCALE as f64).round() as u64
}

/// Weighted-position combination of an uncertainty and a robustness order.
pub fn hybrid_order(
    rank_u: &RankOrder,
    rank_e: &RankOrder,
    u_scores: &[f64],
    gamma: f64,
) -> Result<RankOrder> {
    let n = rank_u.len();
    for len in [rank_e.len(), u_scores.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    check_finite(u_scores)?;
    let g = gamma_units(gamma);
    // Scaled by GAMMA_SCALE; exact in integers.
    let h: Vec<u64> = (0..n)
        .map(|i| g * rank_u.position()[i] as u64 + (GAMMA_SCALE - g) * rank_e.position()[i] as u64)
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| match h[a].cmp(&h[b]) {
        Ordering::Equal => u_scores[b].total_cmp(&u_scores[a]),
        other => other,
    });
    RankOrder::from_order(order)
}

/// `0, step, 2·step, …` up to 1, always ending exactly at 1.
pub fn gamma_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma grid step must lie in (0, 1], got {step}"
        )));
    }
    let step_units = gamma_units(step).max(1);
    let mut grid: Vec<f64> = (0..)
        .map(|k| k * step_units)
        .take_while(|&u| u < GAMMA_SCALE)
        .map(|u| u as f64 / GAMMA_SCALE as f64)
        .collect();
    grid.push(1.0);
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridWeight {
    pub gamma: f64,
    pub grid_step: f64,
    pub train_auarc: f64,
}

/// AU-ARC of the hybrid order at every grid γ, in grid order.
pub fn gamma_profile(
    records: &[ReliabilityRecord],
    u_metric: UncertaintyMetric,
    e_metric: RobustnessMetric,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument(
            "no records to train gamma on".into(),
        ));
    }
    let u = uncertainty_column(records, u_metric);
    let e = robustness_column(records, e_metric);
    let correct = correctness(records);
    let rank_u = order_by_uncertainty(&u)?;
    let rank_e = order_by_robustness(&e)?;
    grid.par_iter()
        .map(|&gamma| {
            let order = hybrid_order(&rank_u, &rank_e, &u, gamma)?;
            Ok((gamma, auarc_of(&order, &correct)?))
        })
        .collect()
}

/// γ with the highest training AU-ARC; ties go to the smallest γ.
pub fn train_gamma(
    records: &[ReliabilityRecord],
    u_metric: UncertaintyMetric,
    e_metric: RobustnessMetric,
    grid_step: f64,
) -> Result<HybridWeight> {
    let grid = gamma_grid(grid_step)?;
    let profile = gamma_profile(records, u_metric, e_metric, &grid)?;
    let mut best = profile[0];
    for &(gamma, score) in &profile[1..] {
        if score > best.1 {
            best = (gamma, score);
        }
    }
    Ok(HybridWeight {
        gamma: best.0,
        grid_step,
        train_auarc: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncertainty_order_examples() {
        assert_eq!(
            order_by_uncertainty(&[0.1, 0.9, 0.5]).unwrap().order(),
            &[1, 2, 0]
        );
        assert_eq!(
            order_by_uncertainty(&[0.3; 4]).unwrap().order(),
            &[0, 1, 2, 3]
        );
    }

    #[test]
    fn robustness_order_examples() {
        assert_eq!(
            order_by_robustness(&[0.1, 0.9, 0.5]).unwrap().order(),
            &[0, 2, 1]
        );
        assert_eq!(
            order_by_robustness(&[0.3; 4]).unwrap().order(),
            &[0, 1, 2, 3]
        );
        assert_eq!(
            order_by_robustness(&[0.1, 0.2, 0.3]).unwrap().order(),
            &[0, 1, 2]
        );
    }

    #[test]
    fn orders_are_reverses_without_ties() {
        let s = [0.4, 0.1, 0.8, 0.3];
        let mut u = order_by_uncertainty(&s).unwrap().order().to_vec();
        u.reverse();
        assert_eq!(u, order_by_robustness(&s).unwrap().order());
    }

    #[test]
    fn nan_is_rejected() {
        assert!(matches!(
            order_by_uncertainty(&[0.1, f64::NAN]),
            Err(Error::NanScore(1))
        ));
        assert!(matches!(
            order_by_robustness(&[f64::NAN]),
            Err(Error::NanScore(0))
        ));
    }

    #[test]
    fn position_inverts_order() {
        let r = RankOrder::from_order(vec![2, 0, 1]).unwrap();
        assert_eq!(r.position(), &[1, 2, 0]);
        assert!(RankOrder::from_order(vec![0, 0]).is_err());
        assert!(RankOrder::from_order(vec![3]).is_err());
    }

    #[test]
    fn full_tie_falls_back_to_uncertainty() {
        let rank_u = RankOrder::from_order(vec![0, 1, 2]).unwrap();
        let rank_e = RankOrder::from_order(vec![2, 1, 0]).unwrap();
        let h = hybrid_order(&rank_u, &rank_e, &[0.9, 0.5, 0.1], 0.5).unwrap();
        assert_eq!(h.order(), &[0, 1, 2]);
    }

    #[test]
    fn endpoints_reproduce_base_orders() {
        let u = [0.3, 0.8, 0.1, 0.5];
        let e = [0.2, 0.05, 0.9, 0.01];
        let ru = order_by_uncertainty(&u).unwrap();
        let re = order_by_robustness(&e).unwrap();
        assert_eq!(hybrid_order(&ru, &re, &u, 1.0).unwrap(), ru);
        assert_eq!(hybrid_order(&ru, &re, &u, 0.0).unwrap(), re);
    }

    #[test]
    fn hybrid_argument_checks() {
        let r = RankOrder::from_order(vec![0, 1]).unwrap();
        let short = RankOrder::from_order(vec![0]).unwrap();
        assert!(matches!(
            hybrid_order(&r, &short, &[0.1, 0.2], 0.5),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(hybrid_order(&r, &r, &[0.1, 0.2], 1.5).is_err());
    }

    #[test]
    fn grid_contains_endpoints() {
        let g = gamma_grid(0.01).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[53], 0.53);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g = gamma_grid(0.3).unwrap();
        assert_eq!(g, vec![0.0, 0.3, 0.6, 0.9, 1.0]);
        assert!(gamma_grid(0.0).is_err());
    }
}
