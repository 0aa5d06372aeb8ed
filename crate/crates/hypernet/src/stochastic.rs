//! Randomness sources: Poisson arrival clock, batch-size law, attractiveness
//! law, and deterministic per-concern RNG substreams.
//!
//! Every concern (arrivals, batch sizes, attractiveness, target selection,
//! initialization) draws from its own substream so that, e.g., swapping the
//! attractiveness law leaves arrival times untouched in a controlled
//! experiment. Identical seed + parameters give bit-identical runs.

use rand::Rng;
use rand::SeedableRng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Strictly positive floor on inter-arrival gaps so node ages can never be
/// zero at a later event (the aging weight divides by age^alpha).
pub const MIN_ARRIVAL_GAP: f64 = 1e-12;

const PMF_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum StochasticError {
    #[error("arrival intensity must be positive, got {0}")]
    InvalidIntensity(f64),
    #[error("invalid batch-size spec: {0}")]
    InvalidBatchSpec(String),
    #[error("invalid attractiveness spec: {0}")]
    InvalidAttractivenessSpec(String),
}

/// Law of the number of nodes arriving per batch. Batch sizes are counts,
/// so only discrete laws with positive-integer support are offered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BatchSizeSpec {
    /// Uniform over the integers `lo..=hi`.
    UniformInt { lo: u32, hi: u32 },
    Constant { n: u32 },
    /// Explicit pmf over positive integers.
    Table { values: Vec<u32>, probs: Vec<f64> },
}

impl BatchSizeSpec {
    pub fn validate(&self) -> Result<(), StochasticError> {
        let bad = |msg: String| Err(StochasticError::InvalidBatchSpec(msg));
        match self {
            BatchSizeSpec::UniformInt { lo, hi } => {
                if *lo == 0 || hi < lo {
                    return bad(format!("uniform_int needs 1 <= lo <= hi, got [{lo}, {hi}]"));
                }
            }
            BatchSizeSpec::Constant { n } => {
                if *n == 0 {
                    return bad("constant batch size must be >= 1".into());
                }
            }
            BatchSizeSpec::Table { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return bad("table needs equally many values and probs".into());
                }
                if values.contains(&0) {
                    return bad("table values must be positive integers".into());
                }
                if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                    return bad("table probs must be finite and nonnegative".into());
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > PMF_SUM_TOL {
                    return bad(format!("table probs sum to {sum}, expected 1"));
                }
            }
        }
        Ok(())
    }

    /// Exact analytic mean (the theory's `m1`).
    pub fn mean(&self) -> f64 {
        match self {
            BatchSizeSpec::UniformInt { lo, hi } => (f64::from(*lo) + f64::from(*hi)) / 2.0,
            BatchSizeSpec::Constant { n } => f64::from(*n),
            BatchSizeSpec::Table { values, probs } => values
                .iter()
                .zip(probs)
                .map(|(&v, &p)| f64::from(v) * p)
                .sum(),
        }
    }

    pub fn sample(&self, rng: &mut Pcg64) -> u32 {
        match self {
            BatchSizeSpec::UniformInt { lo, hi } => rng.gen_range(*lo..=*hi),
            BatchSizeSpec::Constant { n } => *n,
            BatchSizeSpec::Table { values, probs } => {
                let mut u: f64 = rng.gen();
                for (&v, &p) in values.iter().zip(probs) {
                    if u < p {
                        return v;
                    }
                    u -= p;
                }
                *values.last().expect("validated: nonempty")
            }
        }
    }
}

/// Law of the attractiveness assigned to each arriving batch. Support must
/// lie in `[0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttractivenessSpec {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Constant { y: f64 },
    /// Piecewise-constant density: `breaks` has one more entry than
    /// `densities`; segment i has constant density `densities[i]` on
    /// `[breaks[i], breaks[i+1])`.
    TablePdf { breaks: Vec<f64>, densities: Vec<f64> },
}

impl AttractivenessSpec {
    pub fn validate(&self) -> Result<(), StochasticError> {
        let bad = |msg: String| Err(StochasticError::InvalidAttractivenessSpec(msg));
        match self {
            AttractivenessSpec::Uniform { lo, hi } => {
                if !(*lo >= 0.0) || !(hi > lo) {
                    return bad(format!("uniform needs 0 <= lo < hi, got [{lo}, {hi}]"));
                }
            }
            AttractivenessSpec::Exponential { rate } => {
                if !(*rate > 0.0) {
                    return bad(format!("exponential rate must be positive, got {rate}"));
                }
            }
            AttractivenessSpec::Constant { y } => {
                if !(*y >= 0.0) {
                    return bad(format!("constant attractiveness must be >= 0, got {y}"));
                }
            }
            AttractivenessSpec::TablePdf { breaks, densities } => {
                if breaks.len() != densities.len() + 1 || densities.is_empty() {
                    return bad("table_pdf needs len(breaks) == len(densities) + 1".into());
                }
                if !(breaks[0] >= 0.0) {
                    return bad("table_pdf support must be nonnegative".into());
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) {
                    return bad("table_pdf breaks must be strictly increasing".into());
                }
                if densities.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
                    return bad("table_pdf densities must be finite and nonnegative".into());
                }
                let mass: f64 = breaks
                    .windows(2)
                    .zip(densities)
                    .map(|(w, &d)| (w[1] - w[0]) * d)
                    .sum();
                if (mass - 1.0).abs() > 1e-9 {
                    return bad(format!("table_pdf mass is {mass}, expected 1"));
                }
            }
        }
        Ok(())
    }

    /// Exact analytic mean (the theory's `a`).
    pub fn mean(&self) -> f64 {
        match self {
            AttractivenessSpec::Uniform { lo, hi } => (lo + hi) / 2.0,
            AttractivenessSpec::Exponential { rate } => 1.0 / rate,
            AttractivenessSpec::Constant { y } => *y,
            AttractivenessSpec::TablePdf { breaks, densities } => breaks
                .windows(2)
                .zip(densities)
                .map(|(w, &d)| d * (w[1] * w[1] - w[0] * w[0]) / 2.0)
                .sum(),
        }
    }

    pub fn sample(&self, rng: &mut Pcg64) -> f64 {
        match self {
            AttractivenessSpec::Uniform { lo, hi } => lo + (hi - lo) * rng.gen::<f64>(),
            AttractivenessSpec::Exponential { rate } => {
                let u: f64 = rng.gen();
                -(1.0 - u).ln() / rate
            }
            AttractivenessSpec::Constant { y } => *y,
            AttractivenessSpec::TablePdf { breaks, densities } => {
                let mut u: f64 = rng.gen();
                let last = densities.len() - 1;
                for (i, (w, &d)) in breaks.windows(2).zip(densities).enumerate() {
                    let mass = (w[1] - w[0]) * d;
                    if u < mass || i == last {
                        let frac = if mass > 0.0 { u / mass } else { 0.0 };
                        return w[0] + (w[1] - w[0]) * frac.min(1.0);
                    }
                    u -= mass;
                }
                unreachable!("validated: nonempty segments")
            }
        }
    }

    /// Support bounds `(lo, hi)`; `hi` is infinite for the exponential law.
    pub fn support(&self) -> (f64, f64) {
        match self {
            AttractivenessSpec::Uniform { lo, hi } => (*lo, *hi),
            AttractivenessSpec::Exponential { .. } => (0.0, f64::INFINITY),
            AttractivenessSpec::Constant { y } => (*y, *y),
            AttractivenessSpec::TablePdf { breaks, .. } => {
                (breaks[0], *breaks.last().expect("validated"))
            }
        }
    }

    /// Density at `y` (used when mixing theory curves over attractiveness).
    pub fn pdf(&self, y: f64) -> f64 {
        match self {
            AttractivenessSpec::Uniform { lo, hi } => {
                if y >= *lo && y < *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            AttractivenessSpec::Exponential { rate } => {
                if y >= 0.0 {
                    rate * (-rate * y).exp()
                } else {
                    0.0
                }
            }
            AttractivenessSpec::Constant { .. } => {
                panic!("point mass has no density; handle Constant separately")
            }
            AttractivenessSpec::TablePdf { breaks, densities } => {
                for (w, &d) in breaks.windows(2).zip(densities) {
                    if y >= w[0] && y < w[1] {
                        return d;
                    }
                }
                0.0
            }
        }
    }
}

/// Poisson arrival clock: batch `i` arrives after the i-th exponential gap,
/// so its arrival time is Gamma(i, lambda) distributed.
#[derive(Debug, Clone)]
pub struct ArrivalClock {
    intensity: f64,
    current_time: f64,
    batch_counter: u64,
}

impl ArrivalClock {
    pub fn new(intensity: f64) -> Result<Self, StochasticError> {
        if !(intensity > 0.0) {
            return Err(StochasticError::InvalidIntensity(intensity));
        }
        Ok(ArrivalClock {
            intensity,
            current_time: 0.0,
            batch_counter: 0,
        })
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn current_time(&self) -> f64 {
        self.current_time
    }

    pub fn batch_counter(&self) -> u64 {
        self.batch_counter
    }

    /// Advance by an Exp(lambda) gap (floored at [`MIN_ARRIVAL_GAP`]) and
    /// return the new time.
    pub fn next_arrival(&mut self, rng: &mut Pcg64) -> f64 {
        let u: f64 = rng.gen();
        let gap = (-(1.0 - u).ln() / self.intensity).max(MIN_ARRIVAL_GAP);
        self.current_time += gap;
        self.batch_counter += 1;
        self.current_time
    }
}

/// Independent PCG-64 substreams derived from one master seed.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub master_seed: u64,
    pub arrivals: Pcg64,
    pub batch_sizes: Pcg64,
    pub attractiveness: Pcg64,
    pub targets: Pcg64,
    pub init: Pcg64,
}

impl RngStreams {
    pub fn from_seed(master_seed: u64) -> Self {
        let derive = |label: u64| Pcg64::seed_from_u64(splitmix64(master_seed ^ label));
        RngStreams {
            master_seed,
            arrivals: derive(0x41_52_52_49_56_41_4c_53),
            batch_sizes: derive(0x42_41_54_43_48_53_5a_00),
            attractiveness: derive(0x41_54_54_52_41_43_54_00),
            targets: derive(0x54_41_52_47_45_54_53_00),
            init: derive(0x49_4e_49_54_00_00_00_00),
        }
    }
}

/// SplitMix64 finalizer, used to spread substream labels over seed space.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
