//! Near-singular channel H = [1 1; 0 ε]: the unscaled integer-forcing rate
//! stays bounded when ε shrinks like P^{-1/2}, while a scaled scheme whose
//! β_2 nearly aligns both rows with integers keeps growing like log P.

use crate::coeff_search::best_full_rank_matrix;
use crate::error::{budget, validation, Result};
use crate::linalg::{sym_eigen, SymmetricMatrix};
use crate::rates::{Power, ScalingVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QChoice {
    /// Q = ε⁻².
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiophConfig {
    pub epsilon: f64,
    pub p_values: Vec<f64>,
    pub q: QChoice,
    /// Fixed second coordinates of the two rows; any coprime pair keeps a
    /// full-rank completion reachable.
    pub a12: i64,
    pub a22: i64,
    /// Cap on scanned grid points for β_2.
    pub max_grid_points: usize,
}

impl DiophConfig {
    pub fn new(epsilon: f64, p_values: Vec<f64>, q: QChoice) -> Result<Self> {
        // ε = 1 is a degenerate boundary kept available for testing
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(validation("epsilon must lie in (0, 1]"));
        }
        if p_values.is_empty() || p_values.iter().any(|&p| !(p > 0.0)) {
            return Err(validation("P values must be positive"));
        }
        if p_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(validation("P values must be strictly increasing"));
        }
        if let QChoice::Value(q) = q {
            if !(q > 0.0) {
                return Err(validation("Q must be positive"));
            }
        }
        Ok(Self { epsilon, p_values, q, a12: 1, a22: 2, max_grid_points: 2_000_000 })
    }

    pub fn q_value(&self) -> f64 {
        match self.q {
            QChoice::Auto => self.epsilon.powi(-2),
            QChoice::Value(q) => q,
        }
    }

    pub fn channel_rows(&self) -> Vec<Vec<f64>> {
        vec![vec![1.0, 1.0], vec![0.0, self.epsilon]]
    }
}

/// A feasible point of the lower-bound search.
#[derive(Debug, Clone, PartialEq)]
pub struct DiophWitness {
    pub value: f64,
    pub beta2: f64,
    pub a11: i64,
    pub a21: i64,
    pub a12: i64,
    pub a22: i64,
    /// max_m |a_m2 β_2 - a_m1| at the witness.
    pub max_align_err: f64,
}

fn bound_value(cfg: &DiophConfig, p: f64, beta2: f64, a11: i64, a21: i64) -> f64 {
    let e2 = cfg.epsilon * cfg.epsilon;
    let d1 = (a11 * a11) as f64 + (cfg.a12 as f64 * beta2 - a11 as f64).powi(2) / e2;
    let d2 = (a21 * a21) as f64 + (cfg.a22 as f64 * beta2 - a21 as f64).powi(2) / e2;
    let t = |num: f64, den: f64| (0.5 * (num / den).log2()).max(0.0);
    let first = t(p, d1).min(t(p, d2));
    let b2p = beta2 * beta2 * p;
    let second = t(b2p, d1).min(t(b2p, d2));
    first + second
}

/// Scans β_2 = j·Q^{-1/2} (j = 1.. while β_2 < Q, capped) and the integers
/// nearest to a_m2 β_2 for the first coordinates, keeps full-rank choices
/// and returns the best evaluated two-term lower bound (β_1 = 1).
///
/// Note the two constraints fight each other: making both alignment errors
/// smaller than Q^{-1/2} forces the rows proportional once Q is large, so
/// exact simultaneous alignment is sacrificed for rank. The surviving
/// near-alignment still grows like log P.
pub fn dioph_lower_bound(cfg: &DiophConfig, p: Power) -> Result<DiophWitness> {
    let q = cfg.q_value();
    let step = q.powf(-0.5);
    let jmax = (q.powf(1.5).floor() as usize).min(cfg.max_grid_points);
    let mut best: Option<DiophWitness> = None;
    for j in 1..=jmax {
        let beta2 = j as f64 * step;
        if beta2 >= q {
            break;
        }
        let r1 = (cfg.a12 as f64 * beta2).round() as i64;
        let r2 = (cfg.a22 as f64 * beta2).round() as i64;
        for a11 in [r1 - 1, r1, r1 + 1] {
            for a21 in [r2 - 1, r2, r2 + 1] {
                if a11 * cfg.a22 - cfg.a12 * a21 == 0 {
                    continue;
                }
                let value = bound_value(cfg, p.value(), beta2, a11, a21);
                if best.as_ref().map_or(true, |b| value > b.value) {
                    let e1 = (cfg.a12 as f64 * beta2 - a11 as f64).abs();
                    let e2 = (cfg.a22 as f64 * beta2 - a21 as f64).abs();
                    best = Some(DiophWitness {
                        value,
                        beta2,
                        a11,
                        a21,
                        a12: cfg.a12,
                        a22: cfg.a22,
                        max_align_err: e1.max(e2),
                    });
                }
            }
        }
    }
    best.ok_or_else(|| {
        budget(format!(
            "no feasible approximation found scanning {jmax} grid points below Q = {q}"
        ))
    })
}

/// Pigeonhole sanity check: some grid β_2 < Q aligns both a_m2 β_2 with
/// integers to within the target error, rank ignored.
pub fn dirichlet_alignment_exists(cfg: &DiophConfig, target_err: f64) -> bool {
    let q = cfg.q_value();
    let step = q.powf(-0.5);
    let jmax = (q.powf(1.5).floor() as usize).min(cfg.max_grid_points);
    for j in 1..=jmax {
        let beta2 = j as f64 * step;
        if beta2 >= q {
            break;
        }
        let e1 = (cfg.a12 as f64 * beta2 - (cfg.a12 as f64 * beta2).round()).abs();
        let e2 = (cfg.a22 as f64 * beta2 - (cfg.a22 as f64 * beta2).round()).abs();
        if e1 < target_err && e2 < target_err {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone)]
pub struct DiophExperiment {
    /// (P, lower bound) per requested power.
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of the bound against log2 P, in bits per
    /// doubling of P.
    pub slope: f64,
}

/// Evaluates the lower bound across the configured P sweep and fits the
/// slope against log2 P.
pub fn dioph_scaling_experiment(cfg: &DiophConfig) -> Result<DiophExperiment> {
    if cfg.p_values.len() < 3 {
        return Err(validation("scaling experiment needs at least 3 P values"));
    }
    let span = cfg.p_values.last().unwrap() / cfg.p_values.first().unwrap();
    if span < 100.0 {
        return Err(validation("P values must span at least two decades"));
    }
    let mut points = Vec::with_capacity(cfg.p_values.len());
    for &p in &cfg.p_values {
        let w = dioph_lower_bound(cfg, Power::new(p)?)?;
        points.push((p, w.value));
    }
    let xs: Vec<f64> = points.iter().map(|(p, _)| p.log2()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    Ok(DiophExperiment { points, slope: sxy / sxx })
}

/// Best unscaled integer-forcing rate on H = [1 1; 0 ε].
pub fn regular_if_rate_on_dioph_channel(epsilon: f64, p: Power) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(validation("epsilon must lie in (0, 1]"));
    }
    let rows = vec![vec![1.0, 1.0], vec![0.0, epsilon]];
    let eig = sym_eigen(&SymmetricMatrix::gram(&rows)?)?;
    let (_, rate) = best_full_rank_matrix(&eig, &ScalingVector::ones(2), p)?;
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_is_one_for_fixed_epsilon() {
        let cfg = DiophConfig::new(
            0.5,
            vec![1e2, 1e3, 1e4, 1e5, 1e6],
            QChoice::Auto,
        )
        .unwrap();
        let e = dioph_scaling_experiment(&cfg).unwrap();
        assert!(e.slope > 0.9 && e.slope < 1.1, "slope {}", e.slope);
    }

    #[test]
    fn witness_is_full_rank_and_consistent() {
        let cfg = DiophConfig::new(0.5, vec![1e2, 1e3, 1e4], QChoice::Auto).unwrap();
        let w = dioph_lower_bound(&cfg, Power::new(1e4).unwrap()).unwrap();
        assert_ne!(w.a11 * w.a22 - w.a12 * w.a21, 0);
        assert!(w.beta2 > 0.0 && w.beta2 < cfg.q_value());
        let again = bound_value(&cfg, 1e4, w.beta2, w.a11, w.a21);
        assert!((again - w.value).abs() < 1e-12);
    }

    #[test]
    fn large_q_witness_keeps_rank_at_cost_of_one_row() {
        // with Q large, sub-Q^{-1/2} alignment of both rows would force the
        // rows proportional; the best full-rank witness keeps one row nearly
        // aligned and pays an O(1) error on the other
        let cfg =
            DiophConfig::new(0.01, vec![1e4], QChoice::Value(1e4)).unwrap();
        let w = dioph_lower_bound(&cfg, Power::new(1e4).unwrap()).unwrap();
        assert_ne!(w.a11 * w.a22 - w.a12 * w.a21, 0);
        let e1 = (w.a12 as f64 * w.beta2 - w.a11 as f64).abs();
        let e2 = (w.a22 as f64 * w.beta2 - w.a21 as f64).abs();
        assert!(e1.min(e2) < 0.01 || w.max_align_err <= 0.5, "errors {e1} {e2}");
        assert!(w.value > 0.0);
        // alignment below Q^{-1/2} for both rows does exist when rank is
        // not demanded
        assert!(dirichlet_alignment_exists(&cfg, 0.01));
    }

    #[test]
    fn boundary_epsilon_beats_hand_built_witness() {
        // ε = 1 with an explicit Q: at an integer grid β_2 = 3 the rows
        // (a11, a21) = (2, 6) are full rank with errors (1, 0); the search
        // must do at least as well
        let cfg = DiophConfig::new(1.0, vec![1e4], QChoice::Value(16.0)).unwrap();
        let w = dioph_lower_bound(&cfg, Power::new(1e4).unwrap()).unwrap();
        assert!(w.value > 0.0);
        assert!(w.max_align_err <= 1.5 + 1e-12);
        let hand = bound_value(&cfg, 1e4, 3.0, 2, 6);
        assert!(w.value >= hand - 1e-12, "search {} vs hand {hand}", w.value);
    }

    #[test]
    fn auto_q_at_boundary_epsilon_has_empty_grid() {
        // Q = 1 leaves no grid point below Q
        let cfg = DiophConfig::new(1.0, vec![1e4], QChoice::Auto).unwrap();
        let err = dioph_lower_bound(&cfg, Power::new(1e4).unwrap()).unwrap_err();
        assert!(matches!(err, crate::Error::Budget(_)));
    }

    #[test]
    fn bound_grows_about_half_log_p_per_term() {
        let cfg = DiophConfig::new(0.01, vec![1e4, 1e6], QChoice::Value(1e4)).unwrap();
        let w4 = dioph_lower_bound(&cfg, Power::new(1e4).unwrap()).unwrap();
        let w6 = dioph_lower_bound(&cfg, Power::new(1e6).unwrap()).unwrap();
        let growth = w6.value - w4.value;
        // two 1/2·log2 terms over a factor 100 in P give about 6.6 bits
        assert!((growth - 100f64.log2()).abs() < 1.5, "growth {growth}");
    }

    #[test]
    fn regular_rate_stays_bounded_for_matched_epsilon() {
        let mut prev = None;
        for p in [1e2f64, 1e4, 1e6] {
            let eps = p.powf(-0.5);
            let r = regular_if_rate_on_dioph_channel(eps, Power::new(p).unwrap()).unwrap();
            if let Some(first) = prev {
                assert!(r <= first + 1.0, "r = {r} vs first {first}");
            } else {
                prev = Some(r);
            }
        }
    }
}
