//! Rate-region construction: sweeping the scaling ratio for a fixed
//! function, Pareto/convex hulls with time-sharing, and scaling
//! optimization.

use crate::coeff_search::Objective;
use crate::error::{validation, Result};
use crate::rates::{
    computation_rate_tuple, ChannelVector, CoefficientVector, Power, RateTuple, ScalingVector,
};

/// Logarithmic sweep of the ratio ρ = β_2/β_1 with β_1 pinned at 1; the
/// single-relay rate formula is invariant to a common β factor, so this
/// loses nothing for two users.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { rho_min: 1e-3, rho_max: 1e3, points: 601 }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(validation("sweep grid must not be empty"));
        }
        if !(self.rho_min > 0.0) || !(self.rho_max >= self.rho_min) {
            return Err(validation("sweep bounds must satisfy 0 < rho_min <= rho_max"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.rho_min];
        }
        let l0 = self.rho_min.ln();
        let l1 = self.rho_max.ln();
        (0..self.points)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

/// Rate points traced for one function as the scaling ratio sweeps.
#[derive(Debug, Clone)]
pub struct RegionCurve {
    /// The generating coefficient vector.
    pub label: CoefficientVector,
    /// One rate tuple per grid point, ordered by the swept ratio.
    pub points: Vec<RateTuple>,
    /// The β value generating each point.
    pub beta_trace: Vec<ScalingVector>,
    /// Users whose coefficient is zero: the function carries nothing for
    /// them, so their reported rate is not a constraint.
    pub unconstrained_users: Vec<usize>,
}

/// Rate points for one function over the swept ratio grid.
pub fn trace_region_fixed_a(
    h: &ChannelVector,
    a: &CoefficientVector,
    p: Power,
    grid: &SweepSpec,
) -> Result<RegionCurve> {
    grid.validate()?;
    if h.len() != 2 {
        // the formula generalizes but ordered curves only make sense for K=2
        return Err(validation("trace_region_fixed_a expects K = 2"));
    }
    let mut points = Vec::with_capacity(grid.points);
    let mut beta_trace = Vec::with_capacity(grid.points);
    for rho in grid.values() {
        let beta = ScalingVector::new(vec![1.0, rho])?;
        points.push(computation_rate_tuple(h, a, &beta, p)?);
        beta_trace.push(beta);
    }
    Ok(RegionCurve {
        label: a.clone(),
        points,
        beta_trace,
        unconstrained_users: a.unconstrained_users(),
    })
}

/// Convex polygon of achievable two-user rate pairs, counterclockwise,
/// starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Hull2D {
    pub vertices: Vec<(f64, f64)>,
}

impl Hull2D {
    /// Signed minimum over the polygon edges of the cross product with the
    /// query point; nonnegative (up to tolerance) means inside or on the
    /// boundary.
    pub fn containment_margin(&self, p: (f64, f64)) -> f64 {
        let n = self.vertices.len();
        if n == 1 {
            let v = self.vertices[0];
            return -(((p.0 - v.0).powi(2) + (p.1 - v.1).powi(2)).sqrt());
        }
        let mut m = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            m = m.min(cross);
        }
        m
    }

    pub fn contains(&self, p: (f64, f64), tol: f64) -> bool {
        self.containment_margin(p) >= -tol
    }
}

/// Convex hull of all curve points, their axis projections and the origin:
/// time-sharing with a silent user makes the projections achievable, and
/// the hull adds time-sharing between schemes.
pub fn pareto_hull(curves: &[RegionCurve]) -> Result<Hull2D> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for c in curves {
        for r in &c.points {
            if r.len() != 2 {
                return Err(validation("pareto_hull expects two-user rate tuples"));
            }
            pts.push((r.get(0), r.get(1)));
        }
    }
    hull_of_points(&pts)
}

/// Monotone-chain hull over the points plus projections and origin.
pub fn hull_of_points(points: &[(f64, f64)]) -> Result<Hull2D> {
    if points.is_empty() {
        return Err(validation("hull of an empty point set"));
    }
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(points.len() * 3 + 1);
    pts.push((0.0, 0.0));
    for &(x, y) in points {
        pts.push((x, y));
        pts.push((x, 0.0));
        pts.push((0.0, y));
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();

    if pts.len() == 1 {
        return Ok(Hull2D { vertices: pts });
    }

    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    // counterclockwise starting at the lexicographically smallest vertex,
    // which is always the origin for nonnegative rates
    let start = lower
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    lower.rotate_left(start);
    Ok(Hull2D { vertices: lower })
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal-near-peak function on [lo, hi].
pub(crate) fn golden_section_max(
    f: &dyn Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let mut c = hi - GOLDEN * (hi - lo);
    let mut d = lo + GOLDEN * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - GOLDEN * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + GOLDEN * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Refinement tolerance of the β optimizer, in log-ρ.
const BETA_REFINE_TOL: f64 = 1e-6;

/// Maximizes `value(beta)` over positive scalings with β_1 pinned at 1, by a
/// coarse log grid per free coordinate followed by coordinate-wise
/// golden-section refinement. Coordinates listed in `frozen` stay at 1.
/// Finds a local optimum; the traced grid gives the global picture for K=2.
pub(crate) fn maximize_over_scalings(
    k: usize,
    frozen: &[usize],
    grid: &SweepSpec,
    value: &dyn Fn(&ScalingVector) -> f64,
) -> Result<(ScalingVector, f64)> {
    grid.validate()?;
    let mut beta = vec![1.0f64; k];
    let mut best = value(&ScalingVector::new(beta.clone())?);
    let free: Vec<usize> = (1..k).filter(|i| !frozen.contains(i)).collect();
    if free.is_empty() {
        return Ok((ScalingVector::new(beta)?, best));
    }
    let passes = if free.len() == 1 { 1 } else { 3 };
    for _ in 0..passes {
        for &i in &free {
            // coarse grid on coordinate i
            let mut coord_best = (beta[i], best);
            for rho in grid.values() {
                let mut b = beta.clone();
                b[i] = rho;
                let v = value(&ScalingVector::new(b)?);
                if v > coord_best.1 {
                    coord_best = (rho, v);
                }
            }
            // golden-section around the winning grid point, in log space
            let step = (grid.rho_max / grid.rho_min).ln() / (grid.points.max(2) - 1) as f64;
            let l = coord_best.0.ln();
            let obj = |t: f64| {
                let mut b = beta.clone();
                b[i] = t.exp();
                value(&ScalingVector::new(b).unwrap())
            };
            let (t, v) = golden_section_max(&obj, l - step, l + step, BETA_REFINE_TOL);
            if v > coord_best.1 {
                coord_best = (t.exp(), v);
            }
            if coord_best.1 > best {
                beta[i] = coord_best.0;
                best = coord_best.1;
            }
        }
    }
    Ok((ScalingVector::new(beta)?, best))
}

/// Searches scalings maximizing the objective for a fixed function. Users
/// with a zero coefficient do not affect the rates of the others, so their
/// scaling stays at the β=1 convention and they contribute zero to the
/// objective.
pub fn optimize_beta(
    h: &ChannelVector,
    a: &CoefficientVector,
    p: Power,
    obj: &Objective,
) -> Result<(ScalingVector, RateTuple)> {
    optimize_beta_with_grid(h, a, p, obj, &SweepSpec::default())
}

pub fn optimize_beta_with_grid(
    h: &ChannelVector,
    a: &CoefficientVector,
    p: Power,
    obj: &Objective,
    grid: &SweepSpec,
) -> Result<(ScalingVector, RateTuple)> {
    let k = h.len();
    if a.len() != k {
        return Err(validation("optimize_beta: h and a length mismatch"));
    }
    if a.is_zero() {
        return Err(validation("optimize_beta: all-zero coefficient vector"));
    }
    obj.validate(k)?;
    let frozen = a.unconstrained_users();
    let value = |beta: &ScalingVector| -> f64 {
        let rates = computation_rate_tuple(h, a, beta, p).expect("validated inputs");
        obj.score(&rates, a)
    };
    let (beta, _) = maximize_over_scalings(k, &frozen, grid, &value)?;
    let rates = computation_rate_tuple(h, a, &beta, p)?;
    Ok((beta, rates))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(h: &[f64]) -> ChannelVector {
        ChannelVector::new(h.to_vec()).unwrap()
    }
    fn cf(a: &[i64]) -> CoefficientVector {
        CoefficientVector::new(a.to_vec()).unwrap()
    }
    fn pw(p: f64) -> Power {
        Power::new(p).unwrap()
    }

    #[test]
    fn trace_hits_regular_point_at_unit_ratio() {
        let grid = SweepSpec { rho_min: 1.0, rho_max: 1.0, points: 1 };
        let c = trace_region_fixed_a(&ch(&[1.0, 5.0]), &cf(&[1, 2]), pw(1.0), &grid).unwrap();
        let expect = 0.5 * (27.0f64 / 14.0).log2();
        assert!((c.points[0].get(0) - expect).abs() < 1e-12);
        assert!((c.points[0].get(1) - expect).abs() < 1e-12);
    }

    #[test]
    fn trace_large_ratio_clamps_first_user() {
        let grid = SweepSpec { rho_min: 1e3, rho_max: 1e3, points: 1 };
        let c = trace_region_fixed_a(&ch(&[1.0, 5.0]), &cf(&[1, 2]), pw(1.0), &grid).unwrap();
        assert_eq!(c.points[0].get(0), 0.0);
    }

    #[test]
    fn trace_points_reproducible_from_beta_trace() {
        let grid = SweepSpec { rho_min: 0.1, rho_max: 10.0, points: 21 };
        let h = ch(&[1.0, 5.0]);
        let a = cf(&[1, 2]);
        let c = trace_region_fixed_a(&h, &a, pw(1.0), &grid).unwrap();
        for (pt, beta) in c.points.iter().zip(&c.beta_trace) {
            let again = computation_rate_tuple(&h, &a, beta, pw(1.0)).unwrap();
            assert_eq!(pt.as_slice(), again.as_slice());
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = SweepSpec { rho_min: 1.0, rho_max: 1.0, points: 0 };
        assert!(trace_region_fixed_a(&ch(&[1.0, 5.0]), &cf(&[1, 2]), pw(1.0), &grid).is_err());
    }

    #[test]
    fn hull_of_single_point_is_rectangle() {
        let h = hull_of_points(&[(1.0, 1.0)]).unwrap();
        assert_eq!(
            h.vertices,
            vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
        );
    }

    #[test]
    fn hull_timesharing_midpoint() {
        let h = hull_of_points(&[(2.0, 0.0), (0.0, 2.0)]).unwrap();
        assert!(h.contains((1.0, 1.0), 1e-9));
        assert!(!h.contains((1.5, 1.5), 1e-9));
    }

    #[test]
    fn hull_contains_every_input_point() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let t = i as f64 / 39.0 * std::f64::consts::FRAC_PI_2;
                (t.cos(), t.sin())
            })
            .collect();
        let h = hull_of_points(&pts).unwrap();
        for &p in &pts {
            assert!(h.contains(p, 1e-9), "{p:?} outside");
        }
    }

    #[test]
    fn hull_rejects_empty() {
        assert!(hull_of_points(&[]).is_err());
    }

    #[test]
    fn optimize_beta_symmetric_instance() {
        let (beta, _) = optimize_beta(
            &ch(&[1.0, 1.0]),
            &cf(&[1, 1]),
            pw(1.0),
            &Objective::SumRate,
        )
        .unwrap();
        assert!((beta.as_slice()[1] - 1.0).abs() < 1e-3, "beta = {beta:?}");
    }

    #[test]
    fn optimize_beta_unconstrained_user_convention() {
        let (beta, _) = optimize_beta(
            &ch(&[1.0, 5.0]),
            &cf(&[1, 0]),
            pw(1.0),
            &Objective::MaxMinRate,
        )
        .unwrap();
        assert_eq!(beta.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn optimize_beta_not_worse_than_unit() {
        let h = ch(&[1.0, 5.0]);
        let a = cf(&[1, 2]);
        let p = pw(1.0);
        let obj = Objective::SumRate;
        let unit = computation_rate_tuple(&h, &a, &ScalingVector::ones(2), p).unwrap();
        let (_, rates) = optimize_beta(&h, &a, p, &obj).unwrap();
        assert!(obj.score(&rates, &a) >= obj.score(&unit, &a) - 1e-12);
    }
}
