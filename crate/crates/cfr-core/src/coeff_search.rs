//! Bounded enumeration of integer coefficient vectors and full-rank integer
//! matrices maximizing rate objectives.
//!
//! Only vectors with `||ã||² <= (max_k β_k²)(1 + P ||h||²)` can give any user
//! a positive rate, so the search space is a finite ellipsoid. Vectors are
//! kept in a normalized form (first nonzero entry positive, gcd one): the
//! rate formula is invariant under `a -> -a`, and an integer multiple `c·a`
//! only shifts every rate down by `log2 |c|`.

use crate::error::{budget, validation, Result};
use crate::linalg::{rank_int, EigenSystem, MAX_DIM};
use crate::rates::{
    computation_rate_tuple, CoefficientMatrix, CoefficientVector, ChannelVector, Power,
    RateTuple, ScalingVector,
};

/// Default cap on enumerated candidates before a search gives up.
pub const DEFAULT_ENUM_BUDGET: usize = 10_000_000;

/// Comparison slack when scoring candidates: algebraically tied objective
/// values may differ by rounding, and the tie-breaks below must still apply.
const SCORE_TIE_TOL: f64 = 1e-9;

/// Box bounds of the candidate ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBounds {
    /// Per-coordinate limit: |a_k| <= per_coord_max[k].
    pub per_coord_max: Vec<i64>,
    /// Bound on ||ã||.
    pub norm_bound: f64,
}

impl SearchBounds {
    /// Bounds from positivity of the rate formula: only
    /// ||ã||² <= (max β²)(1 + P ||h||²) can yield a positive rate.
    pub fn from_instance(h: &ChannelVector, beta: &ScalingVector, p: Power) -> Result<Self> {
        if h.len() != beta.len() {
            return Err(validation("search bounds: h and beta length mismatch"));
        }
        let bmax = beta.as_slice().iter().cloned().fold(0.0f64, f64::max);
        let r2 = bmax * bmax * (1.0 + p.value() * h.norm_sq());
        let r = r2.sqrt();
        let per_coord_max = beta
            .as_slice()
            .iter()
            .map(|&b| (r / b).floor() as i64)
            .collect();
        Ok(Self { per_coord_max, norm_bound: r })
    }
}

/// Selection objective applied to a rate tuple. Users whose coefficient is
/// zero are not carried by the function, so they contribute zero to every
/// objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    MaxMinRate,
    SumRate,
    WeightedSum(Vec<f64>),
}

impl Objective {
    pub fn validate(&self, k: usize) -> Result<()> {
        if let Objective::WeightedSum(w) = self {
            if w.len() != k {
                return Err(validation("weighted_sum: weight count must equal K"));
            }
            if w.iter().any(|&x| !(x >= 0.0)) {
                return Err(validation("weighted_sum: weights must be nonnegative"));
            }
            if w.iter().all(|&x| x == 0.0) {
                return Err(validation("weighted_sum: weights must not be all zero"));
            }
        }
        Ok(())
    }

    /// Objective value with zero-coefficient users zeroed out.
    pub fn score(&self, rates: &RateTuple, a: &CoefficientVector) -> f64 {
        let adj = |k: usize| {
            if a.as_slice()[k] != 0 {
                rates.get(k)
            } else {
                0.0
            }
        };
        match self {
            Objective::MaxMinRate => (0..rates.len())
                .map(adj)
                .fold(f64::INFINITY, f64::min),
            Objective::SumRate => (0..rates.len()).map(adj).sum(),
            Objective::WeightedSum(w) => {
                (0..rates.len()).map(|k| w[k] * adj(k)).sum()
            }
        }
    }
}

/// Divides by the gcd of the entries and flips the sign so the first nonzero
/// entry is positive.
pub fn normalize(a: &CoefficientVector) -> Result<CoefficientVector> {
    if a.is_zero() {
        return Err(validation("normalize: all-zero coefficient vector"));
    }
    let mut g: i64 = 0;
    for &x in a.as_slice() {
        g = gcd(g, x.abs());
    }
    let first_nonzero = a.as_slice().iter().find(|&&x| x != 0).copied().unwrap();
    let sign = if first_nonzero < 0 { -1 } else { 1 };
    CoefficientVector::new(a.as_slice().iter().map(|&x| sign * x / g).collect())
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn is_normalized(v: &[i64]) -> bool {
    let mut g: i64 = 0;
    for &x in v {
        g = gcd(g, x.abs());
        if let Some(&first) = v.iter().find(|&&y| y != 0) {
            if first < 0 {
                return false;
            }
        }
    }
    g == 1
}

/// Every normalized nonzero integer vector with
/// `||ã||² <= (max β²)(1 + P ||h||²)`, each exactly once, in lexicographic
/// order.
pub fn enumerate_candidates(
    h: &ChannelVector,
    beta: &ScalingVector,
    p: Power,
) -> Result<Vec<CoefficientVector>> {
    enumerate_candidates_with_budget(h, beta, p, DEFAULT_ENUM_BUDGET)
}

pub fn enumerate_candidates_with_budget(
    h: &ChannelVector,
    beta: &ScalingVector,
    p: Power,
    max_candidates: usize,
) -> Result<Vec<CoefficientVector>> {
    let bounds = SearchBounds::from_instance(h, beta, p)?;
    let box_size: f64 = bounds
        .per_coord_max
        .iter()
        .map(|&c| 2.0 * c as f64 + 1.0)
        .product();
    if box_size > max_candidates as f64 {
        return Err(budget(format!(
            "candidate box holds ~{box_size:.3e} vectors, over the budget of {max_candidates}; \
             reduce P or K"
        )));
    }
    let k = beta.len();
    let r2 = bounds.norm_bound * bounds.norm_bound * (1.0 + 1e-12);
    let mut out = Vec::new();
    let mut cur = vec![0i64; k];
    enumerate_box(0, &mut cur, &bounds.per_coord_max, beta.as_slice(), r2, &mut out);
    Ok(out)
}

fn enumerate_box(
    depth: usize,
    cur: &mut Vec<i64>,
    limits: &[i64],
    beta: &[f64],
    r2: f64,
    out: &mut Vec<CoefficientVector>,
) {
    if depth == limits.len() {
        if cur.iter().all(|&x| x == 0) || !is_normalized(cur) {
            return;
        }
        let n2: f64 = cur
            .iter()
            .zip(beta)
            .map(|(&a, &b)| (a as f64 * b).powi(2))
            .sum();
        if n2 <= r2 {
            out.push(CoefficientVector::new(cur.clone()).unwrap());
        }
        return;
    }
    for v in -limits[depth]..=limits[depth] {
        cur[depth] = v;
        enumerate_box(depth + 1, cur, limits, beta, r2, out);
    }
    cur[depth] = 0;
}

struct Best {
    a: CoefficientVector,
    rates: RateTuple,
    score: f64,
    constrained_sum: f64,
}

/// True when the candidate ranks above the incumbent: higher score, then
/// higher sum over carried users, then smaller ||a||², then lexicographic.
fn better(score: f64, csum: f64, a: &CoefficientVector, best: &Best) -> bool {
    if score > best.score + SCORE_TIE_TOL {
        return true;
    }
    if score < best.score - SCORE_TIE_TOL {
        return false;
    }
    if csum > best.constrained_sum + SCORE_TIE_TOL {
        return true;
    }
    if csum < best.constrained_sum - SCORE_TIE_TOL {
        return false;
    }
    if a.norm_sq() != best.a.norm_sq() {
        return a.norm_sq() < best.a.norm_sq();
    }
    a.as_slice() < best.a.as_slice()
}

/// Argmax of the objective over the bounded candidate set.
pub fn best_coefficients(
    h: &ChannelVector,
    beta: &ScalingVector,
    p: Power,
    obj: &Objective,
) -> Result<(CoefficientVector, RateTuple)> {
    obj.validate(beta.len())?;
    let cands = enumerate_candidates(h, beta, p)?;
    let mut best: Option<Best> = None;
    for a in cands {
        let rates = computation_rate_tuple(h, &a, beta, p)?;
        let score = obj.score(&rates, &a);
        let csum: f64 = (0..rates.len())
            .filter(|&k| a.as_slice()[k] != 0)
            .map(|k| rates.get(k))
            .sum();
        let replace = match &best {
            None => true,
            Some(b) => better(score, csum, &a, b),
        };
        if replace {
            best = Some(Best { a, rates, score, constrained_sum: csum });
        }
    }
    let b = best.expect("candidate set is never empty");
    Ok((b.a, b.rates))
}

/// All sign-normalized primitive integer vectors `a` with quadratic form
/// value `aᵀ Q a <= r2`, found by Cholesky-based radius-limited enumeration.
/// Returns `(form value, vector)` pairs.
pub fn quadratic_form_points(
    q: &[Vec<f64>],
    r2: f64,
    max_points: usize,
) -> Result<Vec<(f64, Vec<i64>)>> {
    let k = q.len();
    if k == 0 || k > MAX_DIM {
        return Err(validation("quadratic form dimension out of range"));
    }
    // Cholesky Q = UᵀU, U upper triangular
    let mut u = vec![vec![0.0f64; k]; k];
    for i in 0..k {
        let mut d = q[i][i];
        for r in 0..i {
            d -= u[r][i] * u[r][i];
        }
        if d <= 0.0 {
            return Err(validation("quadratic form must be positive definite"));
        }
        u[i][i] = d.sqrt();
        for j in (i + 1)..k {
            let mut s = q[i][j];
            for r in 0..i {
                s -= u[r][i] * u[r][j];
            }
            u[i][j] = s / u[i][i];
        }
    }

    let mut out = Vec::new();
    let mut cur = vec![0i64; k];
    let mut visited = 0usize;
    fp_recurse(&u, k, r2 * (1.0 + 1e-12), 0.0, &mut cur, q, &mut out, &mut visited, max_points)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn fp_recurse(
    u: &[Vec<f64>],
    level: usize, // coordinates level..k-1 are fixed
    r2: f64,
    used: f64,
    cur: &mut Vec<i64>,
    q: &[Vec<f64>],
    out: &mut Vec<(f64, Vec<i64>)>,
    visited: &mut usize,
    max_points: usize,
) -> Result<()> {
    let i = level - 1;
    // center of the admissible interval for coordinate i
    let mut proj = 0.0;
    for j in level..u.len() {
        proj += u[i][j] * cur[j] as f64;
    }
    let center = -proj / u[i][i];
    let rem = r2 - used;
    if rem < 0.0 {
        return Ok(());
    }
    let halfwidth = rem.sqrt() / u[i][i];
    let lo = (center - halfwidth).ceil() as i64;
    let hi = (center + halfwidth).floor() as i64;
    for v in lo..=hi {
        *visited += 1;
        if *visited > max_points {
            return Err(budget(format!(
                "quadratic-form enumeration exceeded {max_points} points"
            )));
        }
        cur[i] = v;
        let term = u[i][i] * (v as f64 - center);
        let used_next = used + term * term;
        if i == 0 {
            if cur.iter().all(|&x| x == 0) || !is_normalized(cur) {
                continue;
            }
            // exact form value from Q, not the recursion accumulator
            let mut g = 0.0;
            for a in 0..q.len() {
                for b in 0..q.len() {
                    g += q[a][b] * cur[a] as f64 * cur[b] as f64;
                }
            }
            if g <= r2 {
                out.push((g, cur.clone()));
            }
        } else {
            fp_recurse(u, level - 1, r2, used_next, cur, q, out, visited, max_points)?;
        }
    }
    cur[i] = 0;
    Ok(())
}

/// The quadratic form `ãᵀ V D Vᵀ ã` restricted to integer `a` with
/// `ã = diag(beta)·a`, where `D_kk = 1/(P λ_k + 1)` and `λ_k` are the
/// eigenvalues of HᵀH.
pub fn effective_noise_form(eig: &EigenSystem, beta: &ScalingVector, p: Power) -> Vec<Vec<f64>> {
    let k = eig.lambdas.len();
    let b = beta.as_slice();
    let mut q = vec![vec![0.0f64; k]; k];
    for (c, &lam) in eig.lambdas.iter().enumerate() {
        let d = 1.0 / (p.value() * lam + 1.0);
        for i in 0..k {
            for j in 0..k {
                q[i][j] += d * eig.v[i][c] * eig.v[j][c] * b[i] * b[j];
            }
        }
    }
    q
}

/// Sorted candidate list in a noise form: ascending by form value, then
/// smaller ||a||², then lexicographic.
pub fn sorted_form_candidates(
    q: &[Vec<f64>],
    r2: f64,
    max_points: usize,
) -> Result<Vec<(f64, Vec<i64>)>> {
    let mut pts = quadratic_form_points(q, r2, max_points)?;
    pts.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| {
                let na: i64 = a.1.iter().map(|&x| x * x).sum();
                let nb: i64 = b.1.iter().map(|&x| x * x).sum();
                na.cmp(&nb)
            })
            .then_with(|| a.1.cmp(&b.1))
    });
    Ok(pts)
}

/// Best full-rank integer matrix for the integer-forcing rate at the given
/// scalings.
///
/// The modified integer-forcing rate decreases in the worst row's noise form
/// value, so the optimum is the K smallest independent vectors of the form —
/// a matroid basis which the sorted greedy scan finds exactly.
/// Returns the matrix and the achieved rate
/// `Σ_k max(0, 1/2 log2(β_k² / max_m g̃_m))`.
pub fn best_full_rank_matrix(
    eig: &EigenSystem,
    beta: &ScalingVector,
    p: Power,
) -> Result<(CoefficientMatrix, f64)> {
    best_full_rank_matrix_with_budget(eig, beta, p, DEFAULT_ENUM_BUDGET)
}

pub fn best_full_rank_matrix_with_budget(
    eig: &EigenSystem,
    beta: &ScalingVector,
    p: Power,
    max_points: usize,
) -> Result<(CoefficientMatrix, f64)> {
    let k = eig.lambdas.len();
    if beta.len() != k {
        return Err(validation("best_full_rank_matrix: beta length must equal K"));
    }
    let q = effective_noise_form(eig, beta, p);
    // the identity matrix is a full-rank candidate, so its worst row bounds
    // the search radius
    let r2 = (0..k).map(|i| q[i][i]).fold(0.0f64, f64::max);
    let cands = sorted_form_candidates(&q, r2, max_points)?;

    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(k);
    let mut worst = 0.0f64;
    for (g, v) in &cands {
        rows.push(v.clone());
        if rank_int(&rows) == rows.len() {
            worst = worst.max(*g);
            if rows.len() == k {
                break;
            }
        } else {
            rows.pop();
        }
    }
    if rows.len() < k {
        return Err(validation("could not assemble a full-rank matrix within the radius"));
    }
    let value: f64 = beta
        .as_slice()
        .iter()
        .map(|&b| (0.5 * (b * b / worst).log2()).max(0.0))
        .sum();
    Ok((CoefficientMatrix::from_rows(rows)?, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sym_eigen, SymmetricMatrix};

    fn ch(h: &[f64]) -> ChannelVector {
        ChannelVector::new(h.to_vec()).unwrap()
    }
    fn cf(a: &[i64]) -> CoefficientVector {
        CoefficientVector::new(a.to_vec()).unwrap()
    }
    fn sc(b: &[f64]) -> ScalingVector {
        ScalingVector::new(b.to_vec()).unwrap()
    }
    fn pw(p: f64) -> Power {
        Power::new(p).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize(&cf(&[-1, -2])).unwrap(), cf(&[1, 2]));
        assert_eq!(normalize(&cf(&[2, 4])).unwrap(), cf(&[1, 2]));
        assert_eq!(normalize(&cf(&[0, -3])).unwrap(), cf(&[0, 1]));
        assert!(normalize(&cf(&[0, 0])).is_err());
    }

    #[test]
    fn enumerate_small_radius() {
        let c = enumerate_candidates(&ch(&[1.0, 0.0]), &sc(&[1.0, 1.0]), pw(1.0)).unwrap();
        let expect: Vec<CoefficientVector> =
            [[0, 1], [1, -1], [1, 0], [1, 1]].iter().map(|v| cf(v)).collect();
        assert_eq!(c, expect);
    }

    #[test]
    fn enumerate_lex_order_and_uniqueness() {
        let c = enumerate_candidates(&ch(&[1.0, 5.0]), &sc(&[1.0, 1.0]), pw(1.0)).unwrap();
        for w in c.windows(2) {
            assert!(w[0].as_slice() < w[1].as_slice(), "not strictly ascending");
        }
        assert!(c.contains(&cf(&[1, 2])), "paper coefficient must be reachable");
    }

    #[test]
    fn enumerate_matches_naive_scan() {
        // completeness at small radius: naive double loop oracle
        let h = ch(&[1.0, 1.0]);
        let beta = sc(&[1.0, 1.0]);
        let p = pw(2.0);
        let got = enumerate_candidates(&h, &beta, p).unwrap();
        let r2 = 1.0 * (1.0 + 2.0 * 2.0);
        let mut naive = Vec::new();
        for x in -10i64..=10 {
            for y in -10i64..=10 {
                if (x, y) == (0, 0) {
                    continue;
                }
                if ((x * x + y * y) as f64) > r2 + 1e-9 {
                    continue;
                }
                if x < 0 || (x == 0 && y < 0) {
                    continue;
                }
                if num_gcd(x.abs(), y.abs()) != 1 {
                    continue;
                }
                naive.push(cf(&[x, y]));
            }
        }
        naive.sort();
        assert_eq!(got, naive);
    }

    fn num_gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a } else { num_gcd(b, a % b) }
    }

    #[test]
    fn budget_guard_trips() {
        let err = enumerate_candidates_with_budget(
            &ch(&[1.0, 5.0]),
            &sc(&[1.0, 1.0]),
            pw(1e9),
            1000,
        )
        .unwrap_err();
        assert!(matches!(err, crate::Error::Budget(_)));
    }

    #[test]
    fn best_maxmin_reference() {
        let (a, rates) = best_coefficients(
            &ch(&[1.0, 5.0]),
            &sc(&[1.0, 1.0]),
            pw(1.0),
            &Objective::MaxMinRate,
        )
        .unwrap();
        assert_eq!(a, cf(&[1, 2]));
        let expect = 0.5 * (27.0f64 / 14.0).log2();
        assert!((rates.get(0) - expect).abs() < 1e-12);
        assert!((rates.get(1) - expect).abs() < 1e-12);
    }

    #[test]
    fn best_maxmin_orthogonal_user() {
        for p in [1.0, 10.0, 100.0] {
            let (a, _) = best_coefficients(
                &ch(&[1.0, 0.0]),
                &sc(&[1.0, 1.0]),
                pw(p),
                &Objective::MaxMinRate,
            )
            .unwrap();
            assert_eq!(a, cf(&[1, 0]), "P={p}");
        }
    }

    #[test]
    fn best_sum_matched_channel() {
        let (a, _) = best_coefficients(
            &ch(&[1.0, 1.0]),
            &sc(&[1.0, 1.0]),
            pw(100.0),
            &Objective::SumRate,
        )
        .unwrap();
        assert_eq!(a, cf(&[1, 1]));
    }

    #[test]
    fn sign_invariance_of_rate() {
        let h = ch(&[1.3, -0.4, 2.2]);
        let beta = sc(&[1.0, 0.7, 2.0]);
        let p = pw(3.0);
        let r1 = computation_rate_tuple(&h, &cf(&[1, -2, 3]), &beta, p).unwrap();
        let r2 = computation_rate_tuple(&h, &cf(&[-1, 2, -3]), &beta, p).unwrap();
        for k in 0..3 {
            assert!((r1.get(k) - r2.get(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_sum_validation() {
        assert!(Objective::WeightedSum(vec![0.0, 0.0]).validate(2).is_err());
        assert!(Objective::WeightedSum(vec![-1.0, 1.0]).validate(2).is_err());
        assert!(Objective::WeightedSum(vec![1.0]).validate(2).is_err());
        assert!(Objective::WeightedSum(vec![2.0, 1.0]).validate(2).is_ok());
    }

    #[test]
    fn identity_channel_matrix() {
        let eig = sym_eigen(&SymmetricMatrix::gram(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap())
            .unwrap();
        let (m, value) = best_full_rank_matrix(&eig, &sc(&[1.0, 1.0]), pw(10.0)).unwrap();
        let mut rows: Vec<&[i64]> = m.rows().iter().map(|r| r.as_slice()).collect();
        rows.sort();
        assert_eq!(rows, vec![&[0, 1][..], &[1, 0][..]]);
        assert!((value - (1.0f64 + 10.0).log2()).abs() < 1e-9);
    }

    #[test]
    fn fig4_regular_matrix() {
        let eig =
            sym_eigen(&SymmetricMatrix::gram(&[vec![0.7, 1.3], vec![0.8, 1.5]]).unwrap()).unwrap();
        let (m, value) = best_full_rank_matrix(&eig, &sc(&[1.0, 1.0]), pw(1e4)).unwrap();
        let mut rows: Vec<&[i64]> = m.rows().iter().map(|r| r.as_slice()).collect();
        rows.sort();
        assert_eq!(rows, vec![&[1, 2][..], &[7, 13][..]]);
        assert!((value - 7.576549708).abs() < 1e-7);
        assert_ne!(m.det().unwrap(), 0);
    }

    #[test]
    fn fig4_modified_matrix() {
        let eig =
            sym_eigen(&SymmetricMatrix::gram(&[vec![0.7, 1.3], vec![0.8, 1.5]]).unwrap()).unwrap();
        let (m, _) = best_full_rank_matrix(&eig, &sc(&[1.0, 4.887]), pw(1e4)).unwrap();
        let mut rows: Vec<&[i64]> = m.rows().iter().map(|r| r.as_slice()).collect();
        rows.sort();
        assert_eq!(rows, vec![&[8, 3][..], &[13, 5][..]]);
        assert_eq!(m.det().unwrap().abs(), 1);
    }

    #[test]
    fn greedy_matches_naive_matrix_scan() {
        // small-P oracle: exhaustive scan over candidate pairs
        let eig =
            sym_eigen(&SymmetricMatrix::gram(&[vec![1.0, 0.3], vec![0.2, 0.9]]).unwrap()).unwrap();
        let beta = sc(&[1.0, 1.3]);
        let p = pw(4.0);
        let (_, value) = best_full_rank_matrix(&eig, &beta, p).unwrap();

        let q = effective_noise_form(&eig, &beta, p);
        let r2 = q[0][0].max(q[1][1]);
        let cands = sorted_form_candidates(&q, r2, 1_000_000).unwrap();
        let mut best = f64::NEG_INFINITY;
        for i in 0..cands.len() {
            for j in (i + 1)..cands.len() {
                let (g1, v1) = &cands[i];
                let (g2, v2) = &cands[j];
                if v1[0] * v2[1] - v1[1] * v2[0] == 0 {
                    continue;
                }
                let worst = g1.max(*g2);
                let val: f64 = beta
                    .as_slice()
                    .iter()
                    .map(|&b| (0.5 * (b * b / worst).log2()).max(0.0))
                    .sum();
                best = best.max(val);
            }
        }
        assert!((value - best).abs() < 1e-12);
    }
}
