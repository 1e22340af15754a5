//! Monte Carlo validation of the analytic formulas: sample the local
//! randomiser, estimate from observed counts, and compare empirical moments
//! against the exact variances.
//!
//! Reproducibility contract: all randomness comes from [`SplitMix64`], a
//! counter-based generator fixed across releases. Rep `i` of a run draws from
//! the substream `SplitMix64::substream(master_seed, i)`, so reps are
//! independent of execution order and may run in parallel. Per-rep estimates
//! are exact rationals; aggregation sums them before any float conversion,
//! making the report identical under any rep permutation.

use serde::{Deserialize, Serialize};

use crate::design::SetSystem;
use crate::error::{Error, Result};
use crate::estimator::{closed_form_estimator, estimate_from_counts, CountVector, EstimatorMatrix};
use crate::protocol::{params_from_theta, ProtocolParams};
use crate::rational::{ceil_scaled_2_64, rat_f64, Rat};
use crate::risk::{variance_coordinate, variance_total, Distribution};
use num_traits::Zero;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The 64-bit finalizer used throughout: a fixed bijective mix.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based pseudorandom generator (splitmix64).
///
/// Output `i` of a stream with seed `s` is `mix64(s + (i+1) * GOLDEN_GAMMA)`,
/// a pure function of `(seed, counter)`: any output is randomly accessible
/// and streams never share state. Not cryptographically secure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    seed: u64,
    counter: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Decorrelated substream for (master seed, stream index); used to give
    /// every Monte Carlo rep its own stream.
    pub fn substream(master_seed: u64, stream_index: u64) -> Self {
        Self::new(mix64(
            master_seed ^ mix64(stream_index.wrapping_add(GOLDEN_GAMMA)),
        ))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(
            self.seed
                .wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)),
        )
    }

    /// Uniform index in `0..n` by the multiply-shift reduction
    /// (bias below n / 2^64).
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Bernoulli draw against an exact rational threshold prescaled with
    /// [`ceil_scaled_2_64`]: true with probability within 2^-64 of the
    /// rational, and exactly the comparison `u/2^64 < threshold`.
    fn below(&mut self, scaled_threshold: u128) -> bool {
        (self.next_u64() as u128) < scaled_threshold
    }
}

/// A design prepared for sampling: the high-probability output sets `Y_x`
/// and their complements, with the protocol parameters.
#[derive(Debug, Clone)]
pub struct RandomiserSpec {
    design: SetSystem,
    params: ProtocolParams,
    dual_blocks: Vec<Vec<usize>>,
    complements: Vec<Vec<usize>>,
    theta_threshold: u128,
}

impl RandomiserSpec {
    /// Precomputes output sets; errors if the parameters were not derived
    /// from this design.
    pub fn new(design: SetSystem, params: ProtocolParams) -> Result<Self> {
        let profile = design.classify();
        let rebuilt = params_from_theta(&profile, &params.theta).map_err(|e| match e {
            Error::NotPureDesign | Error::DegenerateDesign { .. } => Error::ParamMismatch {
                reason: "system is not a pure design".into(),
            },
            other => other,
        })?;
        if rebuilt != params {
            return Err(Error::ParamMismatch {
                reason: "parameters were not derived from this design".into(),
            });
        }
        let dual_blocks = design.dual_blocks();
        let b = design.block_count();
        let complements = dual_blocks
            .iter()
            .map(|yx| (0..b).filter(|y| yx.binary_search(y).is_err()).collect())
            .collect();
        let theta_threshold = ceil_scaled_2_64(&params.theta);
        Ok(Self {
            design,
            params,
            dual_blocks,
            complements,
            theta_threshold,
        })
    }

    pub fn design(&self) -> &SetSystem {
        &self.design
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn dual_blocks(&self) -> &[Vec<usize>] {
        &self.dual_blocks
    }
}

/// One application of the local randomiser: with probability theta a uniform
/// pick from `Y_x`, otherwise a uniform pick from its complement.
pub fn perturb(spec: &RandomiserSpec, x: usize, rng: &mut SplitMix64) -> usize {
    let pool = if rng.below(spec.theta_threshold) {
        &spec.dual_blocks[x]
    } else {
        &spec.complements[x]
    };
    pool[rng.index(pool.len())]
}

/// Exact cumulative thresholds for sampling a distribution with one 64-bit
/// draw per sample.
fn cumulative_thresholds(pi: &Distribution) -> Vec<u128> {
    let mut acc = Rat::zero();
    pi.probs()
        .iter()
        .map(|p| {
            acc += p;
            ceil_scaled_2_64(&acc)
        })
        .collect()
}

fn sample_index(thresholds: &[u128], rng: &mut SplitMix64) -> usize {
    let u = rng.next_u64() as u128;
    thresholds
        .iter()
        .position(|&t| u < t)
        .unwrap_or(thresholds.len() - 1)
}

/// Draws `t` inputs i.i.d. from `pi`, perturbs each, and tallies the outputs.
pub fn run_trial(
    spec: &RandomiserSpec,
    pi: &Distribution,
    t: u64,
    rng: &mut SplitMix64,
) -> Result<CountVector> {
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    if pi.len() != spec.design.point_count() {
        return Err(Error::DimensionMismatch {
            expected: spec.design.point_count(),
            got: pi.len(),
        });
    }
    let thresholds = cumulative_thresholds(pi);
    let mut counts = vec![0u64; spec.design.block_count()];
    for _ in 0..t {
        let x = sample_index(&thresholds, rng);
        let y = perturb(spec, x, rng);
        counts[y] += 1;
    }
    CountVector::new(counts, t)
}

/// Summary of a Monte Carlo run; all floats are produced from exact rational
/// aggregates at the very end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub reps: u64,
    pub t: u64,
    pub seed: u64,
    pub empirical_mean: Vec<f64>,
    pub empirical_variance_total: f64,
    pub analytic_variance_total: f64,
    pub per_coordinate_z: Vec<f64>,
    pub counts_checksum: u64,
}

/// FNV-1a over the rep index and its counts; reps combine by wrapping
/// addition so the total is independent of processing order.
fn rep_checksum(rep: u64, counts: &[u64]) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    let mut eat = |v: u64| {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
    };
    eat(rep);
    for &c in counts {
        eat(c);
    }
    h
}

/// Counts and exact estimate for a single rep of a run. Exposed so tests can
/// verify that rep processing order cannot matter.
pub fn run_rep(
    spec: &RandomiserSpec,
    pi: &Distribution,
    t: u64,
    master_seed: u64,
    rep: u64,
    estimator: &EstimatorMatrix,
) -> Result<(CountVector, Vec<Rat>)> {
    let mut rng = SplitMix64::substream(master_seed, rep);
    let counts = run_trial(spec, pi, t, &mut rng)?;
    let estimate = estimate_from_counts(&spec.design, &spec.params, &counts)?;
    debug_assert_eq!(
        estimate,
        estimator.apply(&counts.rho_hat()).expect("shape"),
        "scalar and matrix estimates diverged"
    );
    Ok((counts, estimate))
}

/// Runs `reps` independent trials and compares empirical moments of the
/// estimator with the analytic formulas.
pub fn monte_carlo(
    spec: &RandomiserSpec,
    pi: &Distribution,
    t: u64,
    reps: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if reps < 2 {
        return Err(Error::InvalidRepCount);
    }
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    let v = spec.design.point_count();
    if pi.len() != v {
        return Err(Error::DimensionMismatch {
            expected: v,
            got: pi.len(),
        });
    }
    let estimator = closed_form_estimator(&spec.design, &spec.params)?;

    let mut sum = vec![Rat::zero(); v];
    let mut sum_sq = vec![Rat::zero(); v];
    let mut checksum = 0u64;
    for rep in 0..reps {
        let (counts, estimate) = run_rep(spec, pi, t, seed, rep, &estimator)?;
        for (j, e) in estimate.iter().enumerate() {
            sum[j] += e;
            sum_sq[j] += e * e;
        }
        checksum = checksum.wrapping_add(rep_checksum(rep, counts.counts()));
    }

    let reps_rat = crate::rational::int_u(reps as usize);
    let mean: Vec<Rat> = sum.iter().map(|s| s / &reps_rat).collect();
    // unbiased sample variance per coordinate, then summed
    let total_var: Rat = (0..v)
        .map(|j| {
            (&sum_sq[j] - &sum[j] * &sum[j] / &reps_rat) / crate::rational::int_u(reps as usize - 1)
        })
        .sum();
    let analytic = variance_total(&spec.params, pi, t)?;

    let per_coordinate_z = (0..v)
        .map(|j| {
            let var_j = variance_coordinate(&spec.params, pi.get(j), t)?;
            let se = (rat_f64(&var_j) / reps as f64).sqrt();
            let diff = rat_f64(&(&mean[j] - pi.get(j)));
            Ok(if se > 0.0 { diff / se } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(SimulationReport {
        reps,
        t,
        seed,
        empirical_mean: mean.iter().map(rat_f64).collect(),
        empirical_variance_total: rat_f64(&total_var),
        analytic_variance_total: rat_f64(&analytic),
        per_coordinate_z,
        counts_checksum: checksum,
    })
}
