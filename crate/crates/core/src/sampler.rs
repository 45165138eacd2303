//! Random vectors in ℝⁿ with density proportional to `e^{−‖x‖}`.
//!
//! Sampled as `R·θ`: θ uniform on the sphere (a normalized Gaussian) and
//! `R ~ Gamma(n, 1)`, drawn as a sum of n unit exponentials.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::{pow2, rational_from_f64, Vector, DEFAULT_DENOM_BITS};

/// Rejection sampling gives up after this many draws.
pub const MAX_ATTEMPTS: u32 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ConeSample {
    pub x: Vec<f64>,
    pub norm: f64,
    /// Draws used, 1 unless conditioned.
    pub attempts: u32,
    /// `(seed, index)` when produced by a [`Sampler`].
    pub provenance: Option<(u64, u64)>,
}

impl ConeSample {
    pub fn rationalize(&self, denom: &BigInt) -> Vector {
        rationalize(&self.x, denom)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = pow2(DEFAULT_DENOM_BITS);
        serde_json::json!({
            "x": self.x,
            "norm": self.norm,
            "rational": self.rationalize(&d).iter().map(crate::numeric::format_rational).collect::<Vec<_>>(),
        })
    }
}

fn unit_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 1e-300 {
            return g.into_iter().map(|v| v / len).collect();
        }
    }
}

pub fn sample_exponential<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ConeSample {
    assert!(n >= 1, "dimension must be positive");
    let radius: f64 = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).sum();
    let x: Vec<f64> = unit_direction(n, rng).into_iter().map(|v| v * radius).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    ConeSample {
        x,
        norm,
        attempts: 1,
        provenance: None,
    }
}

/// Rejection-samples until `‖X‖ ≤ bound`.
pub fn sample_conditioned<R: Rng + ?Sized>(n: usize, rng: &mut R, bound: f64) -> Result<ConeSample> {
    for attempt in 1..=MAX_ATTEMPTS {
        let mut s = sample_exponential(n, rng);
        if s.norm <= bound {
            s.attempts = attempt;
            return Ok(s);
        }
    }
    Err(Error::Internal(format!(
        "no sample with norm <= {bound} in {MAX_ATTEMPTS} attempts"
    )))
}

/// Nearest multiples of `1/denom`, coordinatewise.
pub fn rationalize(x: &[f64], denom: &BigInt) -> Vector {
    x.iter().map(|v| rational_from_f64(*v, denom)).collect()
}

/// Deterministic rng for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seeded sampler that stamps each sample with its provenance.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
    seed: u64,
    index: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Sampler {
            rng: trial_rng(seed, stream),
            seed,
            index: 0,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn stamp(&mut self, mut s: ConeSample) -> ConeSample {
        s.provenance = Some((self.seed, self.index));
        self.index += 1;
        s
    }

    pub fn exponential(&mut self, n: usize) -> ConeSample {
        let s = sample_exponential(n, &mut self.rng);
        self.stamp(s)
    }

    /// Conditioned on `‖X‖ ≤ 2n`.
    pub fn conditioned(&mut self, n: usize) -> Result<ConeSample> {
        let s = sample_conditioned(n, &mut self.rng, 2.0 * n as f64)?;
        Ok(self.stamp(s))
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }
}
