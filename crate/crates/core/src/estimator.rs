//! Unbiased linear estimators for design-based transition matrices.
//!
//! Every estimator constructed here is a left inverse of the transition
//! matrix, verified exactly at construction: `L * Q = I` is a contract, not a
//! tolerance. Three constructions are provided: the closed form from the
//! estimator gap, the Moore-Penrose left inverse (closed form for BIBDs,
//! exact solve otherwise), and the distribution-weighted optimal estimator.

use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::design::{DesignKind, DesignProfile, SetSystem};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::protocol::{build_tpm, ProtocolParams};
use crate::rational::{int_u, Rat};
use crate::risk::Distribution;

/// How an estimator matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    ClosedForm,
    MoorePenroseClosed,
    MoorePenroseGeneric,
    ChaiNayak,
}

/// A v-by-b left inverse of a transition matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimatorMatrix {
    matrix: RationalMatrix,
    provenance: Provenance,
}

impl EstimatorMatrix {
    fn checked(matrix: RationalMatrix, q: &RationalMatrix, provenance: Provenance) -> Result<Self> {
        // failing this is a construction bug, never a data condition
        assert!(
            matrix.mul(q)?.is_identity(),
            "internal: constructed estimator is not a left inverse"
        );
        Ok(Self { matrix, provenance })
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Applies the estimator to an empirical output distribution.
    pub fn apply(&self, rho_hat: &[Rat]) -> Result<Vec<Rat>> {
        self.matrix.mul_vec(rho_hat)
    }
}

impl Serialize for EstimatorMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("EstimatorMatrix", 4)?;
        s.serialize_field("rows", &self.matrix.rows())?;
        s.serialize_field("cols", &self.matrix.cols())?;
        s.serialize_field("entries", &self.matrix.to_string_rows())?;
        s.serialize_field("provenance", &self.provenance)?;
        s.end()
    }
}

/// The closed-form gap coefficients: gamma1 = (1-q*)/(p*-q*) weights outputs
/// inside Y_j, gamma2 = -q*/(p*-q*) weights the rest.
pub fn gap_coefficients(params: &ProtocolParams) -> Result<(Rat, Rat)> {
    let gap = params.gap();
    if gap.is_zero() {
        return Err(Error::DegenerateGap);
    }
    let gamma1 = (Rat::one() - &params.q_star) / &gap;
    let gamma2 = -(&params.q_star / &gap);
    Ok((gamma1, gamma2))
}

/// Builds the closed-form estimator `L = gamma1 A^T + gamma2 (J - A^T)` and
/// verifies `L * Q = I` against the design's transition matrix.
pub fn closed_form_estimator(
    system: &SetSystem,
    params: &ProtocolParams,
) -> Result<EstimatorMatrix> {
    let (gamma1, gamma2) = gap_coefficients(params)?;
    let q = build_tpm(system, params)?;
    let l = RationalMatrix::from_fn(system.point_count(), system.block_count(), |j, i| {
        if system.blocks()[i].binary_search(&j).is_ok() {
            gamma1.clone()
        } else {
            gamma2.clone()
        }
    });
    EstimatorMatrix::checked(l, &q, Provenance::ClosedForm)
}

/// The (c, d) with `Q^T Q = c I + d J` for a pure design:
/// `c = (r-l)(a1-a2)^2`, `d = l(a1-a2)^2 + 2 r a2 (a1-a2) + a2^2 b`.
pub fn qtq_closed_form(profile: &DesignProfile, params: &ProtocolParams) -> Result<(Rat, Rat)> {
    let (r, l) = profile.r_lambda()?;
    let diff = &params.alpha1 - &params.alpha2;
    let c = int_u(r - l) * &diff * &diff;
    let d = int_u(l) * &diff * &diff
        + int_u(2 * r) * &params.alpha2 * &diff
        + &params.alpha2 * &params.alpha2 * int_u(profile.b);
    Ok((c, d))
}

/// Inverts `c I + d J` (v-by-v): returns (c', d') with
/// `c' = 1/c` and `d' = -d / (c (vd + c))`.
pub fn invert_ci_dj(c: &Rat, d: &Rat, v: usize) -> Result<(Rat, Rat)> {
    if c.is_zero() {
        return Err(Error::SingularC);
    }
    let vd_c = int_u(v) * d + c;
    if vd_c.is_zero() {
        return Err(Error::SingularSum);
    }
    let c_prime = Rat::one() / c;
    let d_prime = -(d / (c * vd_c));
    Ok((c_prime, d_prime))
}

/// The Moore-Penrose left inverse `Q+ = (Q^T Q)^-1 Q^T`.
///
/// For BIBD profiles with parameters supplied, `(Q^T Q)^-1` comes from the
/// closed form; otherwise the inverse is found by exact elimination. Either
/// way `Q+ Q = I` is verified.
pub fn moore_penrose(
    q: &RationalMatrix,
    profile: &DesignProfile,
    params: Option<&ProtocolParams>,
) -> Result<EstimatorMatrix> {
    let qt = q.transpose();
    if profile.kind == DesignKind::Bibd {
        if let Some(params) = params {
            let (c, d) = qtq_closed_form(profile, params)?;
            let (c_prime, d_prime) = invert_ci_dj(&c, &d, profile.v)?;
            let inv = RationalMatrix::identity(profile.v)
                .scale(&c_prime)
                .add(&RationalMatrix::ones(profile.v, profile.v).scale(&d_prime))?;
            let l = inv.mul(&qt)?;
            return EstimatorMatrix::checked(l, q, Provenance::MoorePenroseClosed);
        }
    }
    let gram = qt.mul(q)?;
    let l = gram.solve(&qt)?;
    EstimatorMatrix::checked(l, q, Provenance::MoorePenroseGeneric)
}

/// The distribution-weighted optimal estimator
/// `L = (Q^T D^-1 Q)^-1 Q^T D^-1` for the induced output distribution rho.
pub fn cn_optimal_estimator(q: &RationalMatrix, rho: &Distribution) -> Result<EstimatorMatrix> {
    if rho.len() != q.rows() {
        return Err(Error::DimensionMismatch {
            expected: q.rows(),
            got: rho.len(),
        });
    }
    if let Some(index) = rho.probs().iter().position(|p| p.is_zero()) {
        return Err(Error::ZeroInducedProbability { index });
    }
    // Q^T D^-1 scales column i of Q^T by 1/rho_i
    let qt = q.transpose();
    let qt_dinv = RationalMatrix::from_fn(qt.rows(), qt.cols(), |i, j| qt.get(i, j) / rho.get(j));
    let gram = qt_dinv.mul(q)?;
    let l = gram.solve(&qt_dinv)?;
    EstimatorMatrix::checked(l, q, Provenance::ChaiNayak)
}

/// Observed output frequencies: `f[i]` occurrences of output i, summing to t.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountVector {
    f: Vec<u64>,
    t: u64,
}

impl CountVector {
    pub fn new(f: Vec<u64>, t: u64) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidSampleCount);
        }
        let sum: u64 = f.iter().sum();
        if sum != t {
            return Err(Error::CountSumMismatch { sum, t });
        }
        Ok(Self { f, t })
    }

    pub fn counts(&self) -> &[u64] {
        &self.f
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// The empirical output distribution f/t as exact rationals.
    pub fn rho_hat(&self) -> Vec<Rat> {
        let t = int_u(self.t as usize);
        self.f.iter().map(|&c| int_u(c as usize) / &t).collect()
    }
}

/// Exact Euclidean projection of an estimate onto the probability simplex.
///
/// Optional post-processing only: the raw estimator is unbiased and its
/// worked values are asserted unprojected.
pub fn project_to_simplex(estimate: &[Rat]) -> Vec<Rat> {
    let mut sorted = estimate.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut prefix = Rat::zero();
    let mut tau = Rat::zero();
    for (j, value) in sorted.iter().enumerate() {
        prefix += value;
        let candidate = (&prefix - Rat::one()) / int_u(j + 1);
        if value > &candidate {
            tau = candidate;
        }
    }
    estimate
        .iter()
        .map(|p| {
            let shifted = p - &tau;
            if shifted < Rat::zero() {
                Rat::zero()
            } else {
                shifted
            }
        })
        .collect()
}

/// Scalar-form frequency estimate: for each point j, with T_j the tally of
/// observed outputs whose block contains j,
/// `p~_j = (T_j - t q*) / (t (p* - q*))`.
///
/// Entries may fall outside [0,1] and need not sum to 1; the estimator is
/// unbiased, not constrained.
pub fn estimate_from_counts(
    system: &SetSystem,
    params: &ProtocolParams,
    counts: &CountVector,
) -> Result<Vec<Rat>> {
    let profile = system.classify();
    profile.r_lambda()?;
    if counts.f.len() != system.block_count() {
        return Err(Error::DimensionMismatch {
            expected: system.block_count(),
            got: counts.f.len(),
        });
    }
    let gap = params.gap();
    if gap.is_zero() {
        return Err(Error::DegenerateGap);
    }
    let t = int_u(counts.t as usize);
    let duals = system.dual_blocks();
    Ok((0..system.point_count())
        .map(|j| {
            let tally: u64 = duals[j].iter().map(|&i| counts.f[i]).sum();
            (int_u(tally as usize) - &t * &params.q_star) / (&t * &gap)
        })
        .collect())
}
