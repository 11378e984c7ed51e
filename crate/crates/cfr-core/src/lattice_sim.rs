//! Scalar nested-lattice pipeline that mechanically checks the encode /
//! combine / decode algebra behind the rate formula.
//!
//! Component lattices are one-dimensional (fZ for decoding, q_k Z for
//! shaping) repeated across n dimensions. That verifies every algebraic
//! identity in the chain — dithering, the modulo encoder, receiver
//! combining, lattice decoding — without claiming anything about noise
//! tolerance of high-dimensional codes.
//!
//! Key identities exercised here:
//! * Q(βx, βs) = β·Q(x, s) for β > 0;
//! * with z = 0 and α h_k = a_k β_k exactly, the combined observation equals
//!   Σ_k a_k t̃_k with t̃_k = t_k - Q(t_k + β_k d_k, q_k), a fine-lattice
//!   point, so decoding is exact.

use crate::error::{validation, Result};
use crate::rates::CoefficientVector;
use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// One-dimensional nested lattices: a fine decoding lattice fZ and per-user
/// shaping lattices q_k Z with q_k / f a positive integer, plus the per-user
/// scalings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarNestedLattice {
    fine_spacing: f64,
    coarse_spacing_per_user: Vec<f64>,
    beta: Vec<f64>,
}

impl ScalarNestedLattice {
    pub fn new(fine_spacing: f64, coarse_spacing_per_user: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if !(fine_spacing > 0.0) || !fine_spacing.is_finite() {
            return Err(validation("fine spacing must be positive"));
        }
        if coarse_spacing_per_user.is_empty()
            || coarse_spacing_per_user.len() != beta.len()
        {
            return Err(validation("need one coarse spacing and one beta per user"));
        }
        for &q in &coarse_spacing_per_user {
            if !(q > 0.0) {
                return Err(validation("coarse spacings must be positive"));
            }
            let ratio = q / fine_spacing;
            if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
                return Err(validation(format!(
                    "coarse spacing {q} is not an integer multiple of the fine spacing {fine_spacing}"
                )));
            }
        }
        if beta.iter().any(|&b| !(b > 0.0)) {
            return Err(validation("scalings must be positive"));
        }
        Ok(Self { fine_spacing, coarse_spacing_per_user, beta })
    }

    pub fn num_users(&self) -> usize {
        self.beta.len()
    }

    pub fn fine_spacing(&self) -> f64 {
        self.fine_spacing
    }

    pub fn coarse_spacing(&self, k: usize) -> f64 {
        self.coarse_spacing_per_user[k]
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.beta[k]
    }

    /// Codebook size of user k: q_k / f points per dimension.
    pub fn codebook_size(&self, k: usize) -> u64 {
        (self.coarse_spacing_per_user[k] / self.fine_spacing).round() as u64
    }

    /// Message rate of user k in bits per dimension: log2(q_k / f).
    pub fn message_rate(&self, k: usize) -> f64 {
        (self.codebook_size(k) as f64).log2()
    }

    /// Is every entry of `t` a fine-lattice point inside user k's shaping
    /// region [-q_k/2, q_k/2)?
    fn check_codeword(&self, t: &[f64], k: usize) -> Result<()> {
        let q = self.coarse_spacing_per_user[k];
        for &x in t {
            let ratio = x / self.fine_spacing;
            if (ratio - ratio.round()).abs() > 1e-9 {
                return Err(validation(format!("{x} is not a fine-lattice point")));
            }
            if !(-q / 2.0..q / 2.0).contains(&x) {
                return Err(validation(format!("{x} lies outside the shaping region")));
            }
        }
        Ok(())
    }

    /// Uniformly random codeword of user k, n entries.
    pub fn random_codeword<R: Rng>(&self, k: usize, n: usize, rng: &mut R) -> Vec<f64> {
        let size = self.codebook_size(k) as i64;
        let lo = -(size / 2);
        let dist = Uniform::new(lo, lo + size);
        (0..n)
            .map(|_| dist.sample(rng) as f64 * self.fine_spacing)
            .collect()
    }

    /// Dither of user k: uniform on [-q_k/(2β_k), q_k/(2β_k)), n entries.
    pub fn random_dither<R: Rng>(&self, k: usize, n: usize, rng: &mut R) -> DitherVector {
        let half = self.coarse_spacing_per_user[k] / (2.0 * self.beta[k]);
        let dist = Uniform::new(-half, half);
        DitherVector { d: (0..n).map(|_| dist.sample(rng)).collect() }
    }
}

/// Per-user dither sequence, uniform on the scaled shaping interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DitherVector {
    pub d: Vec<f64>,
}

/// Nearest multiple of `spacing`; half-spacing ties round toward +infinity,
/// which keeps the modulo range [-s/2, s/2).
pub fn quantize(x: f64, spacing: f64) -> f64 {
    (x / spacing + 0.5).floor() * spacing
}

/// Quantization error x - Q(x), always in [-s/2, s/2).
pub fn mod_lattice(x: f64, spacing: f64) -> f64 {
    x - quantize(x, spacing)
}

/// Channel input of user k: x = [t/β_k + d] mod (q_k/β_k)Z.
pub fn encode(
    t: &[f64],
    k: usize,
    lattice: &ScalarNestedLattice,
    dither: &DitherVector,
) -> Result<Vec<f64>> {
    if t.len() != dither.d.len() {
        return Err(validation("codeword and dither length mismatch"));
    }
    lattice.check_codeword(t, k)?;
    let beta = lattice.beta(k);
    let spacing = lattice.coarse_spacing(k) / beta;
    Ok(t.iter()
        .zip(&dither.d)
        .map(|(&ti, &di)| mod_lattice(ti / beta + di, spacing))
        .collect())
}

/// Receiver combining: ỹ = α y - Σ_k a_k β_k d_k.
pub fn receiver_combine(
    y: &[f64],
    alpha: f64,
    a: &CoefficientVector,
    lattice: &ScalarNestedLattice,
    dithers: &[DitherVector],
) -> Vec<f64> {
    let n = y.len();
    let mut out: Vec<f64> = y.iter().map(|&v| alpha * v).collect();
    for (k, d) in dithers.iter().enumerate() {
        let c = a.as_slice()[k] as f64 * lattice.beta(k);
        for i in 0..n {
            out[i] -= c * d.d[i];
        }
    }
    out
}

/// Componentwise nearest fine-lattice point.
pub fn decode_function(y_tilde: &[f64], lattice: &ScalarNestedLattice) -> Vec<f64> {
    y_tilde
        .iter()
        .map(|&v| quantize(v, lattice.fine_spacing()))
        .collect()
}

/// The decoder's target Σ_k a_k t̃_k with
/// t̃_k = t_k - Q(t_k + β_k d_k, q_k Z); always a fine-lattice point.
pub fn ground_truth_combination(
    messages: &[Vec<f64>],
    dithers: &[DitherVector],
    a: &CoefficientVector,
    lattice: &ScalarNestedLattice,
) -> Vec<f64> {
    let n = messages[0].len();
    let mut out = vec![0.0; n];
    for k in 0..lattice.num_users() {
        let beta = lattice.beta(k);
        let q = lattice.coarse_spacing(k);
        let ak = a.as_slice()[k] as f64;
        for i in 0..n {
            let t_shift = messages[k][i] - quantize(messages[k][i] + beta * dithers[k].d[i], q);
            out[i] += ak * t_shift;
        }
    }
    out
}

/// Monte-Carlo configuration: K users over n dimensions, channel gains h,
/// function a, receiver scaling α, noise standard deviation, seeded
/// generator.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub lattice: ScalarNestedLattice,
    pub n: usize,
    pub trials: u64,
    pub h: Vec<f64>,
    pub a: CoefficientVector,
    pub alpha: f64,
    pub noise_std: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialReport {
    pub trials: u64,
    pub successes: u64,
    pub failures: u64,
}

/// Runs seeded end-to-end trials: draw messages and dithers, encode, pass
/// through the channel, combine, decode, compare against Σ a_k t̃_k.
///
/// Trials use one ChaCha12 seed with the trial index as the stream, so the
/// report does not depend on execution order.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<TrialReport> {
    let k = cfg.lattice.num_users();
    if cfg.h.len() != k || cfg.a.len() != k {
        return Err(validation("h and a must have one entry per user"));
    }
    if cfg.n == 0 || cfg.trials == 0 {
        return Err(validation("n and trials must be positive"));
    }
    if !(cfg.noise_std >= 0.0) {
        return Err(validation("noise std must be nonnegative"));
    }
    let successes: u64 = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial);
            u64::from(run_one_trial(cfg, &mut rng))
        })
        .sum();
    Ok(TrialReport { trials: cfg.trials, successes, failures: cfg.trials - successes })
}

fn run_one_trial(cfg: &PipelineConfig, rng: &mut ChaCha12Rng) -> bool {
    let k = cfg.lattice.num_users();
    let n = cfg.n;
    let mut messages = Vec::with_capacity(k);
    let mut dithers = Vec::with_capacity(k);
    for user in 0..k {
        messages.push(cfg.lattice.random_codeword(user, n, rng));
        dithers.push(cfg.lattice.random_dither(user, n, rng));
    }
    let mut y = vec![0.0; n];
    for user in 0..k {
        let x = encode(&messages[user], user, &cfg.lattice, &dithers[user])
            .expect("codewords drawn from the codebook");
        for i in 0..n {
            y[i] += cfg.h[user] * x[i];
        }
    }
    if cfg.noise_std > 0.0 {
        for yi in y.iter_mut() {
            *yi += cfg.noise_std * gaussian(rng);
        }
    }
    let combined = receiver_combine(&y, cfg.alpha, &cfg.a, &cfg.lattice, &dithers);
    let decoded = decode_function(&combined, &cfg.lattice);
    let truth = ground_truth_combination(&messages, &dithers, &cfg.a, &cfg.lattice);
    decoded
        .iter()
        .zip(&truth)
        .all(|(&d, &t)| (d - t).abs() < cfg.lattice.fine_spacing() * 1e-6)
}

/// Box-Muller standard normal.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.gen::<f64>();
        if u1 > f64::MIN_POSITIVE {
            let u2: f64 = rng.gen::<f64>();
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}
