//! Point-to-point MIMO with an integer-forcing linear receiver. The receiver
//! decodes K independent integer combinations given by a full-rank A; the
//! per-row effective noise is the quadratic form ãᵀ V D Vᵀ ã with V, D from
//! the eigendecomposition of HᵀH and D_kk = 1/(P λ_k + 1).

use crate::coeff_search::{
    best_full_rank_matrix, effective_noise_form, sorted_form_candidates, DEFAULT_ENUM_BUDGET,
};
use crate::error::{validation, Result};
use crate::linalg::{sym_eigen, EigenSystem, SymmetricMatrix};
use crate::rates::{CoefficientMatrix, Power, ScalingVector};
use crate::region::{golden_section_max, maximize_over_scalings, SweepSpec};

#[derive(Debug, Clone)]
pub struct MimoConfig {
    h_rows: Vec<Vec<f64>>,
    pub p: Power,
}

impl MimoConfig {
    pub fn new(h_rows: Vec<Vec<f64>>, p: Power) -> Result<Self> {
        let m = h_rows.len();
        if m == 0 {
            return Err(validation("channel matrix must not be empty"));
        }
        let k = h_rows[0].len();
        if k == 0 || h_rows.iter().any(|r| r.len() != k) {
            return Err(validation("channel matrix rows must be nonempty and equal length"));
        }
        if h_rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(validation("channel entries must be finite"));
        }
        if float_rank(&h_rows) < m.min(k) {
            return Err(validation("channel matrix must be full rank"));
        }
        Ok(Self { h_rows, p })
    }

    pub fn h_rows(&self) -> &[Vec<f64>] {
        &self.h_rows
    }

    pub fn num_users(&self) -> usize {
        self.h_rows[0].len()
    }

    pub fn eigen(&self) -> Result<EigenSystem> {
        sym_eigen(&SymmetricMatrix::gram(&self.h_rows)?)
    }
}

fn float_rank(rows: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = m[0].len();
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1.0);
    let tol = 1e-10 * scale;
    let mut rank = 0;
    for col in 0..ncols {
        let pivot = (rank..m.len()).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        });
        let Some(pivot) = pivot else { break };
        if m[pivot][col].abs() <= tol {
            continue;
        }
        m.swap(rank, pivot);
        for r in (rank + 1)..m.len() {
            let f = m[r][col] / m[rank][col];
            for c in col..ncols {
                m[r][c] -= f * m[rank][c];
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn validated_matrix(cfg: &MimoConfig, a: &CoefficientMatrix) -> Result<()> {
    let k = cfg.num_users();
    if !a.is_square() || a.num_rows() != k {
        return Err(validation("coefficient matrix must be KxK"));
    }
    if a.det()? == 0 {
        return Err(validation("coefficient matrix must be full rank"));
    }
    Ok(())
}

/// Per-row noise form values g̃_m = ã_mᵀ V D Vᵀ ã_m.
fn row_form_values(
    eig: &EigenSystem,
    a: &CoefficientMatrix,
    beta: &ScalingVector,
    p: Power,
) -> Vec<f64> {
    a.rows()
        .iter()
        .map(|row| {
            let at: Vec<f64> = row
                .as_slice()
                .iter()
                .zip(beta.as_slice())
                .map(|(&ai, &bi)| ai as f64 * bi)
                .collect();
            eig.weighted_quadratic_form(&at, |lam| 1.0 / (p.value() * lam + 1.0))
        })
        .collect()
}

/// Unscaled integer-forcing rate: K · min_m ( -1/2 log2 a_mᵀ V D Vᵀ a_m ),
/// clamped at zero.
pub fn mimo_if_rate_regular(cfg: &MimoConfig, a: &CoefficientMatrix) -> Result<f64> {
    validated_matrix(cfg, a)?;
    let eig = cfg.eigen()?;
    let k = cfg.num_users();
    let ones = ScalingVector::ones(k);
    let worst = row_form_values(&eig, a, &ones, cfg.p)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((k as f64 * (-0.5) * worst.log2()).max(0.0))
}

/// Scaled integer-forcing rate:
/// Σ_k min_m ( -1/2 log2( ã_mᵀ V D Vᵀ ã_m / β_k² ) ), each user's term
/// clamped at zero before summing — a negative term means that user sends
/// nothing.
pub fn mimo_if_rate_modified(
    cfg: &MimoConfig,
    a: &CoefficientMatrix,
    beta: &ScalingVector,
) -> Result<f64> {
    validated_matrix(cfg, a)?;
    if beta.len() != cfg.num_users() {
        return Err(validation("beta length must equal K"));
    }
    let eig = cfg.eigen()?;
    let forms = row_form_values(&eig, a, beta, cfg.p);
    let mut total = 0.0;
    for &b in beta.as_slice() {
        let term = forms
            .iter()
            .map(|&g| -0.5 * (g / (b * b)).log2())
            .fold(f64::INFINITY, f64::min);
        total += term.max(0.0);
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct MimoSearchResult {
    pub beta: ScalingVector,
    pub matrix: CoefficientMatrix,
    pub rate: f64,
}

/// Best unscaled integer-forcing matrix and rate.
pub fn search_regular_if(cfg: &MimoConfig) -> Result<MimoSearchResult> {
    let eig = cfg.eigen()?;
    let beta = ScalingVector::ones(cfg.num_users());
    let (matrix, rate) = best_full_rank_matrix(&eig, &beta, cfg.p)?;
    Ok(MimoSearchResult { beta, matrix, rate })
}

/// Ratio grid scanned when collecting candidate rows for the scaled search.
const POOL_GRID: SweepSpec = SweepSpec { rho_min: 1e-2, rho_max: 1e2, points: 161 };
/// Short-vector candidates kept per grid point.
const POOL_TOP: usize = 8;
/// Bracket padding and min-ratio filter for candidate pairs.
const PAIR_MIN_RATIO: f64 = 4.0;

/// Best scalings and matrix for the scaled integer-forcing rate.
///
/// For two users the rate over the ratio ρ = β_2/β_1 is a jagged landscape
/// of narrow alignment peaks, so a plain grid-and-refine scan misses the
/// optimum. Instead: collect short rows of the noise form across a coarse ρ
/// grid, then for every independent pair golden-search ρ inside the bracket
/// spanned by the parabola minima of the two rows (each row's form value is
/// a parabola in ρ). The best pair over all brackets wins.
pub fn search_modified_if(cfg: &MimoConfig) -> Result<MimoSearchResult> {
    let k = cfg.num_users();
    if k == 2 {
        search_modified_if_2user(cfg)
    } else {
        search_modified_if_general(cfg)
    }
}

fn search_modified_if_2user(cfg: &MimoConfig) -> Result<MimoSearchResult> {
    let eig = cfg.eigen()?;
    let p = cfg.p;

    // unscaled m = V D Vᵀ; scaled form value of row a at ratio rho is
    // m00 a1² + 2 m01 a1 a2 rho + m11 a2² rho²
    let ones = ScalingVector::ones(2);
    let m = effective_noise_form(&eig, &ones, p);

    // baseline: best matrix at β = 1
    let (mut best_matrix, mut best_rate) = best_full_rank_matrix(&eig, &ones, p)?;
    let mut best_beta = ones.clone();

    // candidate pool across the ratio grid
    let mut pool: std::collections::BTreeSet<Vec<i64>> = std::collections::BTreeSet::new();
    for rho in POOL_GRID.values() {
        let beta = ScalingVector::new(vec![1.0, rho])?;
        let q = effective_noise_form(&eig, &beta, p);
        let r2 = q[0][0].max(q[1][1]);
        let cands = sorted_form_candidates(&q, r2, DEFAULT_ENUM_BUDGET)?;
        for (_, v) in cands.iter().take(POOL_TOP) {
            pool.insert(v.clone());
        }
        // ensure the greedy pair itself is present even when beyond the top
        if let Some((_, first)) = cands.first() {
            for (_, v) in cands.iter() {
                if first[0] * v[1] - first[1] * v[0] != 0 {
                    pool.insert(v.clone());
                    break;
                }
            }
        }
    }

    let gval = |a: &[i64], rho: f64| -> f64 {
        let a1 = a[0] as f64;
        let a2 = a[1] as f64;
        m[0][0] * a1 * a1 + 2.0 * m[0][1] * a1 * a2 * rho + m[1][1] * a2 * a2 * rho * rho
    };
    let pair_rate = |a: &[i64], b: &[i64], rho: f64| -> f64 {
        let g = gval(a, rho).max(gval(b, rho));
        (-0.5 * g.log2()).max(0.0) + (0.5 * (rho * rho / g).log2()).max(0.0)
    };
    // ratio minimizing a row's parabola, when it lies at a positive ratio
    let parabola_min = |a: &[i64]| -> Option<f64> {
        if a[1] == 0 {
            return None;
        }
        let r = -m[0][1] * a[0] as f64 / (m[1][1] * a[1] as f64);
        (r > 0.0).then_some(r)
    };

    let pool: Vec<Vec<i64>> = pool.into_iter().collect();
    for i in 0..pool.len() {
        for j in (i + 1)..pool.len() {
            let (a, b) = (&pool[i], &pool[j]);
            if a[0] * b[1] - a[1] * b[0] == 0 {
                continue;
            }
            let mins: Vec<f64> = [parabola_min(a), parabola_min(b)]
                .into_iter()
                .flatten()
                .collect();
            if mins.is_empty() {
                continue;
            }
            let lo = mins.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = mins.iter().cloned().fold(0.0f64, f64::max);
            if hi / lo > PAIR_MIN_RATIO {
                continue;
            }
            let f = |t: f64| pair_rate(a, b, t.exp());
            let (t, rate) = golden_section_max(&f, (0.5 * lo).ln(), (2.0 * hi).ln(), 1e-9);
            if rate > best_rate {
                let rho = t.exp();
                best_rate = rate;
                best_beta = ScalingVector::new(vec![1.0, rho])?;
                let mut rows = vec![a.clone(), b.clone()];
                rows.sort_by(|x, y| {
                    gval(x, rho)
                        .partial_cmp(&gval(y, rho))
                        .unwrap()
                        .then_with(|| x.cmp(y))
                });
                best_matrix = CoefficientMatrix::from_rows(rows)?;
            }
        }
    }

    Ok(MimoSearchResult { beta: best_beta, matrix: best_matrix, rate: best_rate })
}

/// For more than two users: alternate the exact matrix search with
/// coordinate-wise scaling refinement. Local optimum only.
fn search_modified_if_general(cfg: &MimoConfig) -> Result<MimoSearchResult> {
    let eig = cfg.eigen()?;
    let k = cfg.num_users();
    let p = cfg.p;
    let grid = SweepSpec { rho_min: 1e-2, rho_max: 1e2, points: 81 };
    let value = |beta: &ScalingVector| -> f64 {
        best_full_rank_matrix(&eig, beta, p).map(|(_, v)| v).unwrap_or(f64::NEG_INFINITY)
    };
    let (beta, _) = maximize_over_scalings(k, &[], &grid, &value)?;
    let (matrix, rate) = best_full_rank_matrix(&eig, &beta, p)?;
    Ok(MimoSearchResult { beta, matrix, rate })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MimoSweepRow {
    pub snr_db: f64,
    pub r_if_regular: f64,
    pub r_mif: f64,
    /// Constant reference 1/2 log2(1 + 2P); joint decoding achieves at
    /// least this on the near-singular example channel.
    pub r_joint_ml_reference: f64,
}

/// Regular and scaled integer-forcing rates across an SNR sweep.
pub fn mimo_sweep(h_rows: &[Vec<f64>], snr_dbs: &[f64]) -> Result<Vec<MimoSweepRow>> {
    if snr_dbs.is_empty() {
        return Err(validation("mimo_sweep: empty SNR list"));
    }
    snr_dbs
        .iter()
        .map(|&db| {
            let p = Power::from_snr_db(db)?;
            let cfg = MimoConfig::new(h_rows.to_vec(), p)?;
            let reg = search_regular_if(&cfg)?;
            let modi = search_modified_if(&cfg)?;
            Ok(MimoSweepRow {
                snr_db: db,
                r_if_regular: reg.rate,
                r_mif: modi.rate,
                r_joint_ml_reference: 0.5 * (1.0 + 2.0 * p.value()).log2(),
            })
        })
        .collect()
}
