//! Importance-sampling estimator, compensated accumulation and seeded
//! random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};

/// Per-task random stream.
///
/// The generator is ChaCha8 keyed by `seed_from_u64(master_seed)`; the
/// stream index selects ChaCha's 64-bit stream counter. The same
/// (master, stream) pair always reproduces the same sequence, whichever
/// thread draws from it.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// First and second moments of a stream of estimator terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    n: u64,
    zero: u64,
}

impl MomentAccumulator {
    pub fn push(&mut self, v: f64) {
        self.sum.add(v);
        self.sum_sq.add(v * v);
        self.n += 1;
        if v == 0.0 {
            self.zero += 1;
        }
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.n += other.n;
        self.zero += other.zero;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn sum(&self) -> f64 {
        self.sum.value()
    }

    pub fn estimate(&self) -> McEstimate {
        if self.n == 0 {
            return McEstimate::default();
        }
        let n = self.n as f64;
        let mean = self.sum.value() / n;
        let var = if self.n > 1 {
            ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            value: mean,
            stderr: (var / n).sqrt(),
            samples: self.n,
            zero_terms: self.zero,
        }
    }
}

/// Mean of f/p with its standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    /// Terms that contributed exactly zero (rejected or outside support).
    pub zero_terms: u64,
}

impl McEstimate {
    pub fn all_zero(&self) -> bool {
        self.samples > 0 && self.zero_terms == self.samples
    }

    pub fn scaled(self, factor: f64) -> McEstimate {
        McEstimate {
            value: self.value * factor,
            stderr: self.stderr * factor.abs(),
            ..self
        }
    }
}

/// A proposal distribution: draws a point together with its density, or
/// `None` when it has no admissible support.
pub trait Proposal<R: rand::Rng + ?Sized> {
    type Point;
    fn draw(&self, rng: &mut R) -> Option<(Self::Point, f64)>;
}

impl<R, P, F> Proposal<R> for F
where
    R: rand::Rng + ?Sized,
    F: Fn(&mut R) -> Option<(P, f64)>,
{
    type Point = P;
    fn draw(&self, rng: &mut R) -> Option<(P, f64)> {
        self(rng)
    }
}

/// Importance-sampling estimate of ∫ f with `n` draws from `proposal`.
pub fn mc_integrate<R, P, F>(integrand: F, proposal: &P, n: usize, rng: &mut R) -> Result<McEstimate>
where
    R: rand::Rng + ?Sized,
    P: Proposal<R>,
    F: Fn(&P::Point) -> f64,
{
    if n < 2 {
        return Err(SimError::domain(format!("need at least 2 samples, got {n}")));
    }
    let mut acc = MomentAccumulator::default();
    for _ in 0..n {
        let term = match proposal.draw(rng) {
            Some((x, density)) if density > 0.0 => integrand(&x) / density,
            _ => 0.0,
        };
        acc.push(term);
    }
    Ok(acc.estimate())
}
