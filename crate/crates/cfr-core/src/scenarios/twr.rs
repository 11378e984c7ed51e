//! Gaussian two-way relay channel with unequal user powers: both users reach
//! the relay with unit gain, the relay decodes an integer combination and
//! broadcasts with power P_R.

use crate::error::{validation, Result};
use crate::rates::{CoefficientVector, RateTuple, ScalingVector};
use crate::region::{hull_of_points, Hull2D};

/// Feasibility slack for the relay-power constraint check.
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwrConfig {
    pub p1: f64,
    pub p2: f64,
    pub pr: f64,
}

impl TwrConfig {
    pub fn new(p1: f64, p2: f64, pr: f64) -> Result<Self> {
        for (name, v) in [("P1", p1), ("P2", p2), ("PR", pr)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(validation(format!("{name} must be strictly positive")));
            }
        }
        Ok(Self { p1, p2, pr })
    }
}

fn half_log2_pos(x: f64) -> f64 {
    (0.5 * x.log2()).max(0.0)
}

/// Rates when the relay decodes the plain sum of the two messages with the
/// unscaled scheme and broadcasts it:
/// R_k = min{ 1/2 log2⁺(P_k/(P_1+P_2) + P_k), 1/2 log2(1 + P_R) }.
pub fn twr_regular_rates(cfg: &TwrConfig) -> RateTuple {
    let bc = 0.5 * (1.0 + cfg.pr).log2();
    let r1 = half_log2_pos(cfg.p1 / (cfg.p1 + cfg.p2) + cfg.p1).min(bc);
    let r2 = half_log2_pos(cfg.p2 / (cfg.p1 + cfg.p2) + cfg.p2).min(bc);
    RateTuple::new(vec![r1.max(0.0), r2.max(0.0)]).expect("nonnegative by construction")
}

/// Uplink equivalent-noise power for the scaled scheme:
/// Ñ(β) = [P1 P2 (a1β1 - a2β2)² + (a1β1)² P1 + (a2β2)² P2] / (P1 + P2 + 1).
fn noise_tilde(cfg: &TwrConfig, a: (i64, i64), beta: (f64, f64)) -> f64 {
    let (a1, a2) = (a.0 as f64, a.1 as f64);
    let (b1, b2) = beta;
    let diff = a1 * b1 - a2 * b2;
    (cfg.p1 * cfg.p2 * diff * diff
        + (a1 * b1).powi(2) * cfg.p1
        + (a2 * b2).powi(2) * cfg.p2)
        / (cfg.p1 + cfg.p2 + 1.0)
}

/// Rates for the scaled scheme when the relay decodes a1 t1 + a2 t2 (both
/// coefficients nonzero), for scalings feasible w.r.t. the relay power:
/// max{β1² P1, β2² P2} <= P_R.
pub fn twr_modified_rates(
    cfg: &TwrConfig,
    a: &CoefficientVector,
    beta: &ScalingVector,
) -> Result<RateTuple> {
    if a.len() != 2 || beta.len() != 2 {
        return Err(validation("twr_modified_rates expects K = 2"));
    }
    let (a1, a2) = (a.as_slice()[0], a.as_slice()[1]);
    if a1 == 0 || a2 == 0 {
        return Err(validation("twr function must involve both messages (a1, a2 nonzero)"));
    }
    let (b1, b2) = (beta.as_slice()[0], beta.as_slice()[1]);
    if b1 * b1 * cfg.p1 > cfg.pr * (1.0 + FEAS_TOL) {
        return Err(validation(format!(
            "infeasible scaling: beta1^2*P1 = {} exceeds PR = {}",
            b1 * b1 * cfg.p1,
            cfg.pr
        )));
    }
    if b2 * b2 * cfg.p2 > cfg.pr * (1.0 + FEAS_TOL) {
        return Err(validation(format!(
            "infeasible scaling: beta2^2*P2 = {} exceeds PR = {}",
            b2 * b2 * cfg.p2,
            cfg.pr
        )));
    }
    let nt = noise_tilde(cfg, (a1, a2), (b1, b2));
    let bc = (1.0 + cfg.pr) / cfg.pr;
    let r1 = half_log2_pos(cfg.p1 * b1 * b1 / nt).min(0.5 * (b1 * b1 * cfg.p1 * bc).log2());
    let r2 = half_log2_pos(cfg.p2 * b2 * b2 / nt).min(0.5 * (b2 * b2 * cfg.p2 * bc).log2());
    RateTuple::new(vec![r1.max(0.0), r2.max(0.0)])
}

/// Functions swept by default when building the region.
pub const DEFAULT_TWR_FUNCTIONS: [[i64; 2]; 4] = [[1, 1], [1, 2], [2, 1], [2, 3]];

/// Feasible-β sweep resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TwrGrid {
    /// How many decades below the feasibility boundary each β sweeps.
    pub decades: f64,
    /// Grid points per β coordinate.
    pub points: usize,
}

impl Default for TwrGrid {
    fn default() -> Self {
        Self { decades: 3.0, points: 121 }
    }
}

impl TwrGrid {
    fn values(&self, top: f64) -> Vec<f64> {
        if self.points == 1 {
            return vec![top];
        }
        (0..self.points)
            .map(|i| top * 10f64.powf(-self.decades * i as f64 / (self.points - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TwrRegion {
    pub hull: Hull2D,
    /// The unscaled-scheme reference pair.
    pub regular: RateTuple,
}

/// Sweeps feasible scalings for each function, unions the rate points and
/// builds the time-sharing hull. The β = (1,1) point is always included when
/// feasible so the unscaled reference is reproduced exactly.
pub fn twr_region(
    cfg: &TwrConfig,
    functions: &[CoefficientVector],
    grid: &TwrGrid,
) -> Result<TwrRegion> {
    if functions.is_empty() {
        return Err(validation("twr_region needs at least one function"));
    }
    if grid.points == 0 {
        return Err(validation("twr_region: empty grid"));
    }
    let b1_top = (cfg.pr / cfg.p1).sqrt();
    let b2_top = (cfg.pr / cfg.p2).sqrt();
    let b1s = grid.values(b1_top);
    let b2s = grid.values(b2_top);

    let mut pts: Vec<(f64, f64)> = Vec::new();
    for a in functions {
        for &b1 in &b1s {
            for &b2 in &b2s {
                let beta = ScalingVector::new(vec![b1, b2])?;
                let r = twr_modified_rates(cfg, a, &beta)?;
                pts.push((r.get(0), r.get(1)));
            }
        }
        if cfg.pr >= cfg.p1.max(cfg.p2) {
            let unit = ScalingVector::ones(2);
            let r = twr_modified_rates(cfg, a, &unit)?;
            pts.push((r.get(0), r.get(1)));
        }
    }
    Ok(TwrRegion { hull: hull_of_points(&pts)?, regular: twr_regular_rates(cfg) })
}

#[derive(Debug, Clone)]
pub struct TwrBestSum {
    pub a: CoefficientVector,
    pub beta: ScalingVector,
    pub rates: RateTuple,
    pub sum: f64,
}

/// Grid search for the best sum rate of the scaled scheme over functions
/// with both coefficients in 1..=coeff_max (relative sign swept) and the
/// feasible-β grid.
pub fn twr_best_sum(cfg: &TwrConfig, coeff_max: i64, grid: &TwrGrid) -> Result<TwrBestSum> {
    if coeff_max < 1 {
        return Err(validation("coeff_max must be at least 1"));
    }
    let b1s = grid.values((cfg.pr / cfg.p1).sqrt());
    let b2s = grid.values((cfg.pr / cfg.p2).sqrt());
    let mut best: Option<TwrBestSum> = None;
    for a1 in 1..=coeff_max {
        for a2 in (-coeff_max..=coeff_max).filter(|&x| x != 0) {
            let a = CoefficientVector::new(vec![a1, a2])?;
            for &b1 in &b1s {
                for &b2 in &b2s {
                    let beta = ScalingVector::new(vec![b1, b2])?;
                    let rates = twr_modified_rates(cfg, &a, &beta)?;
                    let sum = rates.sum();
                    if best.as_ref().map_or(true, |b| sum > b.sum) {
                        best = Some(TwrBestSum { a: a.clone(), beta, rates, sum });
                    }
                }
            }
        }
    }
    Ok(best.expect("grid is nonempty"))
}
