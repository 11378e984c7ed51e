//! Dense linear algebra for the small systems that appear here (K ≤ 8):
//! symmetric eigendecomposition by cyclic Jacobi rotations and exact integer
//! determinants by fraction-free elimination.

use crate::error::{validation, Result};

/// Largest matrix dimension the module accepts.
pub const MAX_DIM: usize = 8;

const SYMMETRY_TOL: f64 = 1e-12;

/// A K×K real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    entries: Vec<Vec<f64>>,
}

impl SymmetricMatrix {
    /// Builds from rows, checking squareness and symmetry (within 1e-12).
    pub fn new(entries: Vec<Vec<f64>>) -> Result<Self> {
        let k = entries.len();
        if k == 0 {
            return Err(validation("symmetric matrix must have K >= 1"));
        }
        if k > MAX_DIM {
            return Err(validation(format!("K = {k} exceeds supported maximum {MAX_DIM}")));
        }
        for row in &entries {
            if row.len() != k {
                return Err(validation("symmetric matrix must be square"));
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if (entries[i][j] - entries[j][i]).abs() > SYMMETRY_TOL {
                    return Err(validation(format!(
                        "matrix not symmetric at ({i},{j}): {} vs {}",
                        entries[i][j], entries[j][i]
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Gram matrix HᵀH of an M×K matrix given by rows.
    pub fn gram(h_rows: &[Vec<f64>]) -> Result<Self> {
        let m = h_rows.len();
        if m == 0 {
            return Err(validation("gram: empty matrix"));
        }
        let k = h_rows[0].len();
        if h_rows.iter().any(|r| r.len() != k) {
            return Err(validation("gram: ragged rows"));
        }
        let mut g = vec![vec![0.0; k]; k];
        for row in h_rows {
            for i in 0..k {
                for j in 0..k {
                    g[i][j] += row[i] * row[j];
                }
            }
        }
        // symmetrize exactly so the constructor check cannot trip on rounding
        for i in 0..k {
            for j in (i + 1)..k {
                let v = 0.5 * (g[i][j] + g[j][i]);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Self::new(g)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.entries
    }
}

/// Eigendecomposition S = V·diag(lambdas)·Vᵀ with orthonormal columns of `v`
/// and eigenvalues sorted descending.
///
/// For a Gram matrix HᵀH the entries of `lambdas` are the squared singular
/// values of H.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Columns are eigenvectors; `v[i][j]` is row i, column j.
    pub v: Vec<Vec<f64>>,
    /// Eigenvalues, descending.
    pub lambdas: Vec<f64>,
}

impl EigenSystem {
    /// Applies the quadratic form xᵀ·V·diag(d(λ))·Vᵀ·x for a per-eigenvalue
    /// diagonal weight, without materializing the matrix product.
    pub fn weighted_quadratic_form(&self, x: &[f64], diag: impl Fn(f64) -> f64) -> f64 {
        let k = self.lambdas.len();
        let mut acc = 0.0;
        for (j, &lam) in self.lambdas.iter().enumerate() {
            let mut proj = 0.0;
            for i in 0..k {
                proj += self.v[i][j] * x[i];
            }
            acc += diag(lam) * proj * proj;
        }
        acc
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The sweep order is fixed (row-major over the strict upper triangle), the
/// eigenvalues are sorted descending and each eigenvector is sign-normalized
/// so its largest-magnitude entry is positive, which makes the output
/// deterministic and suitable for golden tests.
pub fn sym_eigen(s: &SymmetricMatrix) -> Result<EigenSystem> {
    let k = s.dim();
    let mut a: Vec<Vec<f64>> = s.entries.clone();
    let mut v = vec![vec![0.0; k]; k];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, &x| m.max(x.abs()))
        .max(1.0);
    let tol = 1e-15 * scale;
    const MAX_SWEEPS: usize = 64;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..k {
            for q in (p + 1)..k {
                off += a[p][q].abs();
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..k {
            for q in (p + 1)..k {
                let apq = a[p][q];
                if apq.abs() <= tol * 1e-3 {
                    continue;
                }
                // rotation annihilating a[p][q]
                let theta = 0.5 * (a[q][q] - a[p][p]) / apq;
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                let tau = sn / (1.0 + c);

                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for i in 0..k {
                    if i != p && i != q {
                        let aip = a[i][p];
                        let aiq = a[i][q];
                        a[i][p] = aip - sn * (aiq + tau * aip);
                        a[p][i] = a[i][p];
                        a[i][q] = aiq + sn * (aip - tau * aiq);
                        a[q][i] = a[i][q];
                    }
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = vip - sn * (viq + tau * vip);
                    row[q] = viq + sn * (vip - tau * viq);
                }
            }
        }
    }

    let mut lambdas: Vec<f64> = (0..k).map(|i| a[i][i]).collect();

    // sort descending, reorder eigenvector columns accordingly
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| lambdas[j].partial_cmp(&lambdas[i]).unwrap());
    lambdas = order.iter().map(|&i| lambdas[i]).collect();
    let mut v_sorted = vec![vec![0.0; k]; k];
    for (newc, &oldc) in order.iter().enumerate() {
        for i in 0..k {
            v_sorted[i][newc] = v[i][oldc];
        }
    }

    // sign convention: largest-magnitude entry of each column positive
    for c in 0..k {
        let mut imax = 0;
        for i in 1..k {
            if v_sorted[i][c].abs() > v_sorted[imax][c].abs() {
                imax = i;
            }
        }
        if v_sorted[imax][c] < 0.0 {
            for row in v_sorted.iter_mut() {
                row[c] = -row[c];
            }
        }
    }

    Ok(EigenSystem { v: v_sorted, lambdas })
}

/// Exact determinant of a square integer matrix via Bareiss fraction-free
/// elimination. Nonzero iff the matrix is full rank.
pub fn det_int(a: &[Vec<i64>]) -> Result<i64> {
    let k = a.len();
    if k == 0 {
        return Err(validation("det_int: empty matrix"));
    }
    if k > MAX_DIM {
        return Err(validation(format!("det_int: K = {k} exceeds supported maximum {MAX_DIM}")));
    }
    if a.iter().any(|r| r.len() != k) {
        return Err(validation("det_int: matrix must be square"));
    }
    let mut m: Vec<Vec<i128>> = a
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();

    let overflow = || validation("det_int: intermediate value overflow");

    let mut sign = 1i128;
    let mut prev = 1i128;
    for col in 0..k {
        if m[col][col] == 0 {
            let Some(swap) = (col + 1..k).find(|&r| m[r][col] != 0) else {
                return Ok(0);
            };
            m.swap(col, swap);
            sign = -sign;
        }
        for r in (col + 1)..k {
            for c in (col + 1)..k {
                let p1 = m[col][col].checked_mul(m[r][c]).ok_or_else(overflow)?;
                let p2 = m[r][col].checked_mul(m[col][c]).ok_or_else(overflow)?;
                let num = p1.checked_sub(p2).ok_or_else(overflow)?;
                // Bareiss guarantees exact divisibility by the previous pivot
                m[r][c] = num / prev;
            }
            m[r][col] = 0;
        }
        prev = m[col][col];
    }
    let det = sign * m[k - 1][k - 1];
    i64::try_from(det).map_err(|_| validation("det_int: determinant exceeds i64"))
}

/// Rank of an integer matrix given by rows (entries small, exact arithmetic).
pub fn rank_int(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let (pr, rest) = m.split_at_mut(rank + 1);
        let prow = &pr[rank];
        for row in rest.iter_mut() {
            if row[col] != 0 {
                let a = prow[col];
                let b = row[col];
                for c in 0..ncols {
                    row[c] = row[c] * a - prow[c] * b;
                }
                // keep magnitudes in check
                let g = row.iter().fold(0i128, |g, &x| gcd_i128(g, x.abs()));
                if g > 1 {
                    for x in row.iter_mut() {
                        *x /= g;
                    }
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
