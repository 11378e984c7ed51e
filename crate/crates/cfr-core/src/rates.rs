//! Achievable computation-rate formulas for a relay decoding an integer
//! linear combination of lattice-coded messages, with per-user transmit
//! scalings `beta`.
//!
//! The single-relay rate of user k is
//!
//! ```text
//! r_k = [ -1/2 log2( ||ã||² - P (hᵀã)² / (1 + P ||h||²) ) + 1/2 log2 β_k² ]⁺
//! ```
//!
//! with effective coefficients `ã_k = β_k a_k`. With several relays each
//! decoding its own combination, user k is limited by the worst relay.

use crate::error::{validation, Result};
use crate::linalg::{det_int, rank_int, MAX_DIM};

/// Real channel gains from the K users to one relay.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    h: Vec<f64>,
}

impl ChannelVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() {
            return Err(validation("channel vector must have K >= 1"));
        }
        if h.iter().any(|x| !x.is_finite()) {
            return Err(validation("channel gains must be finite"));
        }
        Ok(Self { h })
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.h
    }

    pub fn norm_sq(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum()
    }
}

/// Integer coefficients of the linear function a relay decodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoefficientVector {
    a: Vec<i64>,
}

impl CoefficientVector {
    pub fn new(a: Vec<i64>) -> Result<Self> {
        if a.is_empty() {
            return Err(validation("coefficient vector must have K >= 1"));
        }
        Ok(Self { a })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.a
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    pub fn norm_sq(&self) -> i64 {
        self.a.iter().map(|&x| x * x).sum()
    }

    /// Users whose coefficient is zero, i.e. whose message does not appear in
    /// the decoded function.
    pub fn unconstrained_users(&self) -> Vec<usize> {
        self.a
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == 0)
            .map(|(k, _)| k)
            .collect()
    }

    /// Compact text form like `[1,-2]`, used as a label in emitted records.
    pub fn label(&self) -> String {
        let inner: Vec<String> = self.a.iter().map(|x| x.to_string()).collect();
        format!("[{}]", inner.join(","))
    }
}

/// A full set of K relay coefficient rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientMatrix {
    rows: Vec<CoefficientVector>,
}

impl CoefficientMatrix {
    pub fn new(rows: Vec<CoefficientVector>) -> Result<Self> {
        if rows.is_empty() {
            return Err(validation("coefficient matrix must have at least one row"));
        }
        let k = rows[0].len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(validation("coefficient matrix rows must have equal length"));
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(CoefficientVector::new).collect::<Result<_>>()?)
    }

    pub fn rows(&self) -> &[CoefficientVector] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_square(&self) -> bool {
        self.num_rows() == self.num_cols()
    }

    /// Exact determinant (square matrices only).
    pub fn det(&self) -> Result<i64> {
        let m: Vec<Vec<i64>> = self.rows.iter().map(|r| r.as_slice().to_vec()).collect();
        det_int(&m)
    }

    pub fn is_full_rank(&self) -> bool {
        let m: Vec<Vec<i64>> = self.rows.iter().map(|r| r.as_slice().to_vec()).collect();
        rank_int(&m) == self.num_rows().min(self.num_cols())
    }
}

/// Strictly positive per-user transmit scalings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector {
    beta: Vec<f64>,
}

impl ScalingVector {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(validation("scaling vector must have K >= 1"));
        }
        if beta.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(validation("scalings must be strictly positive and finite"));
        }
        Ok(Self { beta })
    }

    pub fn ones(k: usize) -> Self {
        Self { beta: vec![1.0; k] }
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.beta
    }
}

/// Effective coefficients ã_k = β_k a_k.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCoefficientVector {
    a_tilde: Vec<f64>,
}

impl EffectiveCoefficientVector {
    pub fn from_reals(a_tilde: Vec<f64>) -> Result<Self> {
        if a_tilde.is_empty() {
            return Err(validation("effective coefficient vector must have K >= 1"));
        }
        Ok(Self { a_tilde })
    }

    pub fn len(&self) -> usize {
        self.a_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_tilde.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a_tilde
    }

    pub fn norm_sq(&self) -> f64 {
        self.a_tilde.iter().map(|x| x * x).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.a_tilde.iter().all(|&x| x == 0.0)
    }
}

/// Per-user message rates in bits per real channel use; never negative.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTuple {
    rates: Vec<f64>,
}

impl RateTuple {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.iter().any(|&r| !(r >= 0.0)) {
            return Err(validation("rates must be nonnegative"));
        }
        Ok(Self { rates })
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rates
    }

    pub fn get(&self, k: usize) -> f64 {
        self.rates[k]
    }

    pub fn sum(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Per-user transmit power; the noise variance is fixed at one, so this is
/// also the SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    p: f64,
}

impl Power {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(validation("power must be strictly positive and finite"));
        }
        Ok(Self { p })
    }

    /// SNR given in dB, mapped as P = 10^(dB/10).
    pub fn from_snr_db(db: f64) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn value(&self) -> f64 {
        self.p
    }
}

fn check_same_len(n1: usize, n2: usize, what: &str) -> Result<()> {
    if n1 != n2 {
        return Err(validation(format!("{what}: length mismatch ({n1} vs {n2})")));
    }
    Ok(())
}

/// ã_k = β_k a_k, computed exactly per coordinate.
pub fn effective_coeffs(
    a: &CoefficientVector,
    beta: &ScalingVector,
) -> Result<EffectiveCoefficientVector> {
    check_same_len(a.len(), beta.len(), "effective_coeffs")?;
    let at: Vec<f64> = a
        .as_slice()
        .iter()
        .zip(beta.as_slice())
        .map(|(&ai, &bi)| ai as f64 * bi)
        .collect();
    EffectiveCoefficientVector::from_reals(at)
}

/// The receiver-side scaling minimizing the equivalent noise power:
/// α* = P hᵀã / (1 + P ||h||²).
pub fn mmse_alpha(
    h: &ChannelVector,
    a_tilde: &EffectiveCoefficientVector,
    p: Power,
) -> Result<f64> {
    check_same_len(h.len(), a_tilde.len(), "mmse_alpha")?;
    let p = p.value();
    let dot: f64 = h
        .as_slice()
        .iter()
        .zip(a_tilde.as_slice())
        .map(|(&x, &y)| x * y)
        .sum();
    Ok(p * dot / (1.0 + p * h.norm_sq()))
}

/// Equivalent noise power N(α) = ||αh - ã||² P + α².
pub fn equivalent_noise_power(
    h: &ChannelVector,
    a_tilde: &EffectiveCoefficientVector,
    alpha: f64,
    p: Power,
) -> Result<f64> {
    check_same_len(h.len(), a_tilde.len(), "equivalent_noise_power")?;
    let dev: f64 = h
        .as_slice()
        .iter()
        .zip(a_tilde.as_slice())
        .map(|(&x, &y)| {
            let d = alpha * x - y;
            d * d
        })
        .sum();
    Ok(dev * p.value() + alpha * alpha)
}

/// The quantity inside the rate logarithm at the optimal α:
/// ||ã||² - P (hᵀã)² / (1 + P ||h||²)  (= N(α*)/P).
///
/// Strictly positive for ã ≠ 0 by Cauchy-Schwarz.
pub fn rate_inner_term(
    h: &ChannelVector,
    a_tilde: &EffectiveCoefficientVector,
    p: Power,
) -> Result<f64> {
    check_same_len(h.len(), a_tilde.len(), "rate_inner_term")?;
    let p = p.value();
    let dot: f64 = h
        .as_slice()
        .iter()
        .zip(a_tilde.as_slice())
        .map(|(&x, &y)| x * y)
        .sum();
    Ok(a_tilde.norm_sq() - p * dot * dot / (1.0 + p * h.norm_sq()))
}

fn validated_inputs(
    h: &ChannelVector,
    a: &CoefficientVector,
    beta: &ScalingVector,
) -> Result<()> {
    check_same_len(h.len(), a.len(), "rate computation")?;
    check_same_len(h.len(), beta.len(), "rate computation")?;
    if a.is_zero() {
        return Err(validation(
            "coefficient vector must not be all zero for rate computation",
        ));
    }
    Ok(())
}

/// Per-user rates before the clamp at zero. All users share the common term
/// `-1/2 log2(inner)`; user k adds its offset `1/2 log2 β_k²`, so
/// `r_k - r_j = log2(β_k/β_j)` for any two users.
pub fn unclamped_computation_rates(
    h: &ChannelVector,
    a: &CoefficientVector,
    beta: &ScalingVector,
    p: Power,
) -> Result<Vec<f64>> {
    validated_inputs(h, a, beta)?;
    let at = effective_coeffs(a, beta)?;
    let inner = rate_inner_term(h, &at, p)?;
    let common = -0.5 * inner.log2();
    Ok(beta
        .as_slice()
        .iter()
        .map(|&b| common + 0.5 * (b * b).log2())
        .collect())
}

/// Achievable computation rate tuple for a single relay decoding the
/// function given by `a`, clamped at zero per user.
pub fn computation_rate_tuple(
    h: &ChannelVector,
    a: &CoefficientVector,
    beta: &ScalingVector,
    p: Power,
) -> Result<RateTuple> {
    let r = unclamped_computation_rates(h, a, beta, p)?;
    RateTuple::new(r.into_iter().map(|x| x.max(0.0)).collect())
}

fn validated_relays(
    channels: &[ChannelVector],
    coeffs: &[CoefficientVector],
    beta: &ScalingVector,
) -> Result<()> {
    if channels.is_empty() {
        return Err(validation("multi-relay rate requires at least one relay"));
    }
    check_same_len(channels.len(), coeffs.len(), "relays vs coefficient rows")?;
    if beta.len() > MAX_DIM {
        return Err(validation(format!("K > {MAX_DIM} not supported")));
    }
    Ok(())
}

/// Per-user, per-relay unclamped rates: `out[m][k]` is user k's rate at
/// relay m.
pub fn per_relay_unclamped_rates(
    channels: &[ChannelVector],
    coeffs: &[CoefficientVector],
    beta: &ScalingVector,
    p: Power,
) -> Result<Vec<Vec<f64>>> {
    validated_relays(channels, coeffs, beta)?;
    channels
        .iter()
        .zip(coeffs)
        .map(|(h, a)| unclamped_computation_rates(h, a, beta, p))
        .collect()
}

/// Rate tuple when all M relays must decode their functions: the minimum
/// over relays of the unclamped per-user rates, clamped at zero last.
pub fn multi_relay_rate_tuple(
    channels: &[ChannelVector],
    coeffs: &[CoefficientVector],
    beta: &ScalingVector,
    p: Power,
) -> Result<RateTuple> {
    let per_relay = per_relay_unclamped_rates(channels, coeffs, beta, p)?;
    let k = beta.len();
    let rates = (0..k)
        .map(|user| {
            per_relay
                .iter()
                .map(|r| r[user])
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
        })
        .collect();
    RateTuple::new(rates)
}

/// Which relay's decoding lattice each user's codebook must use: the relay
/// with the smallest clamped rate for that user, ties to the smallest relay
/// index. Indices are zero-based.
pub fn decoding_lattice_assignment(
    channels: &[ChannelVector],
    coeffs: &[CoefficientVector],
    beta: &ScalingVector,
    p: Power,
) -> Result<Vec<usize>> {
    let per_relay = per_relay_unclamped_rates(channels, coeffs, beta, p)?;
    let k = beta.len();
    Ok((0..k)
        .map(|user| {
            let mut best = 0usize;
            for m in 1..per_relay.len() {
                if per_relay[m][user].max(0.0) < per_relay[best][user].max(0.0) {
                    best = m;
                }
            }
            best
        })
        .collect())
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
    fn sc(b: &[f64]) -> ScalingVector {
        ScalingVector::new(b.to_vec()).unwrap()
    }
    fn pw(p: f64) -> Power {
        Power::new(p).unwrap()
    }

    #[test]
    fn effective_coeffs_examples() {
        let e = effective_coeffs(&cf(&[1, 2]), &sc(&[1.0, 1.0])).unwrap();
        assert_eq!(e.as_slice(), &[1.0, 2.0]);

        // Fig. 4 parameters: exact products
        let e = effective_coeffs(&cf(&[8, 3]), &sc(&[1.0, 4.887])).unwrap();
        assert_eq!(e.as_slice(), &[8.0, 3.0 * 4.887]);
        assert!((e.as_slice()[1] - 14.661).abs() < 1e-12);

        let e = effective_coeffs(&cf(&[0, 1]), &sc(&[3.0, 2.0])).unwrap();
        assert_eq!(e.as_slice(), &[0.0, 2.0]);

        assert!(effective_coeffs(&cf(&[1]), &sc(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn mmse_alpha_examples() {
        let a = mmse_alpha(
            &ch(&[1.0, 0.0]),
            &EffectiveCoefficientVector::from_reals(vec![1.0, 0.0]).unwrap(),
            pw(1.0),
        )
        .unwrap();
        assert!((a - 0.5).abs() < 1e-15);

        // closed form 11/27 for the two-user instance
        let a = mmse_alpha(
            &ch(&[1.0, 5.0]),
            &EffectiveCoefficientVector::from_reals(vec![1.0, 2.0]).unwrap(),
            pw(1.0),
        )
        .unwrap();
        assert!((a - 11.0 / 27.0).abs() < 1e-15);

        let a = mmse_alpha(
            &ch(&[2.0, -3.0]),
            &EffectiveCoefficientVector::from_reals(vec![0.0, 0.0]).unwrap(),
            pw(5.0),
        )
        .unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn noise_power_examples() {
        // h == ã and α = 1 leaves only the α² term
        let n = equivalent_noise_power(
            &ch(&[1.0, 2.0]),
            &EffectiveCoefficientVector::from_reals(vec![1.0, 2.0]).unwrap(),
            1.0,
            pw(7.0),
        )
        .unwrap();
        assert!((n - 1.0).abs() < 1e-15);

        // N at the MMSE α equals P * inner term = 14/27 here
        let h = ch(&[1.0, 5.0]);
        let at = EffectiveCoefficientVector::from_reals(vec![1.0, 2.0]).unwrap();
        let n = equivalent_noise_power(&h, &at, 11.0 / 27.0, pw(1.0)).unwrap();
        assert!((n - 14.0 / 27.0).abs() < 1e-12);
        let inner = rate_inner_term(&h, &at, pw(1.0)).unwrap();
        assert!((inner - 14.0 / 27.0).abs() < 1e-12);

        let n = equivalent_noise_power(
            &ch(&[1.0, 5.0]),
            &EffectiveCoefficientVector::from_reals(vec![0.0, 0.0]).unwrap(),
            0.0,
            pw(1.0),
        )
        .unwrap();
        assert_eq!(n, 0.0);
    }

    #[test]
    fn mmse_alpha_is_local_minimum() {
        let h = ch(&[1.0, 5.0]);
        let at = EffectiveCoefficientVector::from_reals(vec![1.0, 2.0]).unwrap();
        let p = pw(1.0);
        let astar = mmse_alpha(&h, &at, p).unwrap();
        let nstar = equivalent_noise_power(&h, &at, astar, p).unwrap();
        for delta in [1e-3, 1e-2, 0.1] {
            for sign in [-1.0, 1.0] {
                let n = equivalent_noise_power(&h, &at, astar + sign * delta, p).unwrap();
                assert!(nstar <= n + 1e-15);
            }
        }
    }

    #[test]
    fn rate_tuple_matched_single_user() {
        // h=[1,0], a=[1,0]: the relay sees a clean single-user channel
        let r =
            computation_rate_tuple(&ch(&[1.0, 0.0]), &cf(&[1, 0]), &sc(&[1.0, 1.0]), pw(1.0))
                .unwrap();
        assert!((r.get(0) - 0.5).abs() < 1e-12);
        assert!((r.get(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rate_tuple_reference_instance() {
        let r =
            computation_rate_tuple(&ch(&[1.0, 5.0]), &cf(&[1, 2]), &sc(&[1.0, 1.0]), pw(1.0))
                .unwrap();
        let expect = 0.5 * (27.0f64 / 14.0).log2();
        assert!((r.get(0) - expect).abs() < 1e-12);
        assert!((r.get(1) - expect).abs() < 1e-12);
    }

    #[test]
    fn rate_offset_identity() {
        let u = unclamped_computation_rates(
            &ch(&[1.0, 5.0]),
            &cf(&[1, 2]),
            &sc(&[1.0, 2.0]),
            pw(1.0),
        )
        .unwrap();
        assert!((u[1] - u[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_coefficients_rejected() {
        assert!(computation_rate_tuple(
            &ch(&[1.0, 5.0]),
            &cf(&[0, 0]),
            &sc(&[1.0, 1.0]),
            pw(1.0)
        )
        .is_err());
    }

    #[test]
    fn multi_relay_degenerates_to_single() {
        let h = ch(&[1.0, 5.0]);
        let a = cf(&[1, 2]);
        let beta = sc(&[1.0, 1.0]);
        let p = pw(1.0);
        let single = computation_rate_tuple(&h, &a, &beta, p).unwrap();
        let multi =
            multi_relay_rate_tuple(&[h.clone()], &[a.clone()], &beta, p).unwrap();
        assert_eq!(single.as_slice(), multi.as_slice());

        // duplicated relay changes nothing
        let dup = multi_relay_rate_tuple(&[h.clone(), h], &[a.clone(), a], &beta, p).unwrap();
        assert_eq!(single.as_slice(), dup.as_slice());
    }

    #[test]
    fn multi_relay_reference_instance() {
        // frozen from direct evaluation of the rate formula on the two rows
        let channels = [ch(&[0.7, 1.3]), ch(&[0.8, 1.5])];
        let coeffs = [cf(&[1, 2]), cf(&[7, 13])];
        let beta = sc(&[1.0, 1.0]);
        let p = pw(1e4);
        let per = per_relay_unclamped_rates(&channels, &coeffs, &beta, p).unwrap();
        assert!((per[0][0] - 3.848930587).abs() < 1e-8);
        assert!((per[1][0] - 3.252974418).abs() < 1e-8);
        let r = multi_relay_rate_tuple(&channels, &coeffs, &beta, p).unwrap();
        assert!((r.get(0) - 3.252974418).abs() < 1e-8);
        assert!((r.get(1) - 3.252974418).abs() < 1e-8);

        let m = decoding_lattice_assignment(&channels, &coeffs, &beta, p).unwrap();
        assert_eq!(m, vec![1, 1]);
    }

    #[test]
    fn assignment_single_relay() {
        let m = decoding_lattice_assignment(
            &[ch(&[1.0, 5.0])],
            &[cf(&[1, 2])],
            &sc(&[1.0, 1.0]),
            pw(1.0),
        )
        .unwrap();
        assert_eq!(m, vec![0, 0]);
    }

    #[test]
    fn assignment_uniform_dominance() {
        // relay 1 (index 1) has a strictly noisier function for every user
        let channels = [ch(&[1.0, 5.0]), ch(&[1.0, 5.0])];
        let coeffs = [cf(&[1, 2]), cf(&[2, 3])];
        let beta = sc(&[1.0, 1.0]);
        let p = pw(1.0);
        let m = decoding_lattice_assignment(&channels, &coeffs, &beta, p).unwrap();
        let per = per_relay_unclamped_rates(&channels, &coeffs, &beta, p).unwrap();
        assert!(per[1][0] < per[0][0]);
        assert_eq!(m, vec![1, 1]);
    }

    #[test]
    fn zero_relays_rejected() {
        assert!(multi_relay_rate_tuple(&[], &[], &sc(&[1.0]), pw(1.0)).is_err());
    }
}
