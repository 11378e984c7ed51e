//! Two-user multiple-access region: one curve per decoded function, plus the
//! equal-rate point of the unscaled scheme for reference.

use crate::coeff_search::{best_coefficients, Objective};
use crate::error::{validation, Result};
use crate::rates::{ChannelVector, CoefficientVector, Power, RateTuple, ScalingVector};
use crate::region::{trace_region_fixed_a, RegionCurve, SweepSpec};

/// Functions plotted by default. The exact sets behind the published figure
/// are only marked in its plot, so this is a configurable choice.
pub const DEFAULT_MAC_FUNCTIONS: [[i64; 2]; 4] = [[1, 2], [1, 3], [1, 5], [2, 5]];

#[derive(Debug, Clone)]
pub struct MacRegion {
    pub curves: Vec<RegionCurve>,
    /// Best equal-rate coefficients at β = 1 and the rate pair they achieve.
    pub red_dot: (CoefficientVector, RateTuple),
}

/// One traced curve per function plus the β=1 equal-rate reference point.
pub fn mac_region(
    h: &ChannelVector,
    p: Power,
    functions: &[CoefficientVector],
    grid: &SweepSpec,
) -> Result<MacRegion> {
    if h.len() != 2 {
        return Err(validation("mac_region expects K = 2"));
    }
    if functions.is_empty() {
        return Err(validation("mac_region needs at least one function"));
    }
    let curves = functions
        .iter()
        .map(|a| trace_region_fixed_a(h, a, p, grid))
        .collect::<Result<Vec<_>>>()?;
    let red_dot = best_coefficients(h, &ScalingVector::ones(2), p, &Objective::MaxMinRate)?;
    Ok(MacRegion { curves, red_dot })
}
