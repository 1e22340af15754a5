//! Exact variances of design-based estimators, the distribution-weighted
//! risk identity, lower bounds, and communication cost.
//!
//! Several independent formula routes compute the same variance; tests and
//! the acceptance suite hold them to exact agreement. The only float in this
//! module is [`communication_cost`], a display-only quantity.

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::design::{DesignKind, DesignProfile, SetSystem};
use crate::error::{Error, Result};
use crate::estimator::{
    closed_form_estimator, cn_optimal_estimator, moore_penrose, EstimatorMatrix, Provenance,
};
use crate::matrix::RationalMatrix;
use crate::protocol::{build_tpm, ProtocolParams};
use crate::rational::{int_u, rat_f64, rat_string, Rat};

/// An exact probability vector: entries >= 0, summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    probs: Vec<Rat>,
}

impl Distribution {
    pub fn new(probs: Vec<Rat>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "empty".into(),
            });
        }
        if let Some(p) = probs.iter().find(|p| p.is_negative()) {
            return Err(Error::InvalidDistribution {
                reason: format!("negative entry {}", rat_string(p)),
            });
        }
        let sum: Rat = probs.iter().cloned().sum();
        if !sum.is_one() {
            return Err(Error::InvalidDistribution {
                reason: format!("entries sum to {}, not 1", rat_string(&sum)),
            });
        }
        Ok(Self { probs })
    }

    /// Uniform distribution on n outcomes.
    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![Rat::one() / int_u(n); n],
        }
    }

    /// All mass on outcome `i`.
    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut probs = vec![Rat::zero(); n];
        probs[i] = Rat::one();
        Self { probs }
    }

    /// The dyadic distribution (1/2, 1/4, ..., 1/2^(n-1), 1/2^(n-1)).
    pub fn dyadic(n: usize) -> Self {
        assert!(n >= 2);
        let mut probs: Vec<Rat> = (1..n)
            .map(|i| Rat::new(1.into(), num_bigint::BigInt::from(1u128 << i)))
            .collect();
        probs.push(probs.last().unwrap().clone());
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[Rat] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> &Rat {
        &self.probs[i]
    }

    /// Sum of squared probabilities, a recurring term in the variance
    /// formulas.
    pub fn sum_of_squares(&self) -> Rat {
        self.probs.iter().map(|p| p * p).sum()
    }
}

/// The output distribution rho = Q pi induced by an input distribution.
pub fn induced_distribution(q: &RationalMatrix, pi: &Distribution) -> Result<Distribution> {
    if q.cols() != pi.len() {
        return Err(Error::DimensionMismatch {
            expected: q.cols(),
            got: pi.len(),
        });
    }
    Distribution::new(q.mul_vec(pi.probs())?)
}

fn positive_gap(params: &ProtocolParams) -> Result<Rat> {
    let gap = params.gap();
    if gap.is_zero() {
        return Err(Error::DegenerateGap);
    }
    Ok(gap)
}

/// Per-coordinate variance of the frequency estimator at true probability
/// `p_j` with `t` samples, from the binomial law of the tally:
/// `Var = ((1-2q*) p_j g + q* - p_j^2 g^2 - q*^2) / (t g^2)` with `g = p*-q*`.
pub fn variance_coordinate(params: &ProtocolParams, p_j: &Rat, t: u64) -> Result<Rat> {
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    if p_j.is_negative() || *p_j > Rat::one() {
        return Err(Error::InvalidDistribution {
            reason: format!("coordinate probability {} outside [0,1]", rat_string(p_j)),
        });
    }
    let g = positive_gap(params)?;
    let q = &params.q_star;
    let numerator = (Rat::one() - int_u(2) * q) * p_j * &g + q - p_j * p_j * &g * &g - q * q;
    Ok(numerator / (int_u(t as usize) * &g * &g))
}

/// Total variance of the estimator vector:
/// `(1-2q*)/(t g) + n q*(1-q*)/(t g^2) - sum p_j^2 / t`.
pub fn variance_total(params: &ProtocolParams, pi: &Distribution, t: u64) -> Result<Rat> {
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    let g = positive_gap(params)?;
    let q = &params.q_star;
    let n = int_u(pi.len());
    let t_rat = int_u(t as usize);
    let term1 = (Rat::one() - int_u(2) * q) / (&t_rat * &g);
    let term2 = &n * q * (Rat::one() - q) / (&t_rat * &g * &g);
    let term3 = pi.sum_of_squares() / &t_rat;
    Ok(term1 + term2 - term3)
}

/// BIBD form of the total variance in terms of the privacy ratio:
/// `(1/t) ( (n-1)^2 (k g + n - k)^2 / (k (n-k) (g-1)^2 n) + 1/n - sum p_j^2 )`.
pub fn variance_pnl_bibd(
    profile: &DesignProfile,
    gamma: &Rat,
    pi: &Distribution,
    t: u64,
) -> Result<Rat> {
    if profile.kind != DesignKind::Bibd {
        return Err(Error::NotBIBD);
    }
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    if *gamma <= Rat::one() {
        return Err(Error::GammaNotGreaterThanOne);
    }
    let n = profile.v;
    let k = profile.block_size.expect("BIBD has constant block size");
    let n_rat = int_u(n);
    let gm1 = gamma - Rat::one();
    let main = int_u((n - 1) * (n - 1)) * (int_u(k) * gamma + int_u(n - k)).pow(2)
        / (int_u(k * (n - k)) * &gm1 * &gm1 * &n_rat);
    let total = main + Rat::one() / &n_rat - pi.sum_of_squares();
    Ok(total / int_u(t as usize))
}

/// General (r,lambda)-design form of the total variance:
/// `(1/t) ( (r g + (n-1)(l g + r - l)) (n(m-r) + (n-1)(r-l)(g-1))
///          / ((r-l)^2 (g-1)^2 n) + 1/n - sum p_j^2 )`.
pub fn variance_pnl_rlambda(
    profile: &DesignProfile,
    gamma: &Rat,
    pi: &Distribution,
    t: u64,
) -> Result<Rat> {
    let (r, l) = profile.r_lambda()?;
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    if *gamma <= Rat::one() {
        return Err(Error::GammaNotGreaterThanOne);
    }
    let n = profile.v;
    let m = profile.b;
    let gm1 = gamma - Rat::one();
    let factor1 = int_u(r) * gamma + int_u(n - 1) * (int_u(l) * gamma + int_u(r - l));
    let factor2 = int_u(n * (m - r)) + int_u((n - 1) * (r - l)) * &gm1;
    let main = factor1 * factor2 / (int_u((r - l) * (r - l)) * &gm1 * &gm1 * int_u(n));
    let total = main + Rat::one() / int_u(n) - pi.sum_of_squares();
    Ok(total / int_u(t as usize))
}

/// The t-normalised risk `R = trace(L D_rho L^T) - sum p_i^2`; the estimator
/// variance at sample size t is `R / t`.
pub fn risk_trace(
    estimator: &EstimatorMatrix,
    rho: &Distribution,
    pi: &Distribution,
) -> Result<Rat> {
    let l = estimator.matrix();
    if rho.len() != l.cols() {
        return Err(Error::DimensionMismatch {
            expected: l.cols(),
            got: rho.len(),
        });
    }
    if pi.len() != l.rows() {
        return Err(Error::DimensionMismatch {
            expected: l.rows(),
            got: pi.len(),
        });
    }
    let trace: Rat = (0..l.rows())
        .map(|i| {
            (0..l.cols())
                .map(|k| rho.get(k) * l.get(i, k) * l.get(i, k))
                .sum::<Rat>()
        })
        .sum();
    Ok(trace - pi.sum_of_squares())
}

/// Estimator variance via the risk identity: `risk_trace / t`.
pub fn variance_via_risk_trace(
    estimator: &EstimatorMatrix,
    rho: &Distribution,
    pi: &Distribution,
    t: u64,
) -> Result<Rat> {
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    Ok(risk_trace(estimator, rho, pi)? / int_u(t as usize))
}

/// `trace((Q^T D_rho^-1 Q)^-1)`, the information quantity behind the
/// distribution-weighted lower bound.
pub fn cn_information_trace(q: &RationalMatrix, rho: &Distribution) -> Result<Rat> {
    if rho.len() != q.rows() {
        return Err(Error::DimensionMismatch {
            expected: q.rows(),
            got: rho.len(),
        });
    }
    if let Some(index) = rho.probs().iter().position(|p| p.is_zero()) {
        return Err(Error::ZeroInducedProbability { index });
    }
    let qt = q.transpose();
    let qt_dinv = RationalMatrix::from_fn(qt.rows(), qt.cols(), |i, j| qt.get(i, j) / rho.get(j));
    let gram = qt_dinv.mul(q)?;
    Ok(gram.inverse()?.trace())
}

/// The general variance lower bound
/// `(1/t) (trace((Q^T D_rho^-1 Q)^-1) - sum p_j^2)`.
pub fn cn_lower_bound(
    q: &RationalMatrix,
    rho: &Distribution,
    pi: &Distribution,
    t: u64,
) -> Result<Rat> {
    if t == 0 {
        return Err(Error::InvalidSampleCount);
    }
    let trace = cn_information_trace(q, rho)?;
    Ok((trace - pi.sum_of_squares()) / int_u(t as usize))
}

/// Closed form for `trace((Q^T Q)^-1) = v (c' + d')` on a BIBD.
pub fn trace_uniform_bibd(profile: &DesignProfile, params: &ProtocolParams) -> Result<Rat> {
    if profile.kind != DesignKind::Bibd {
        return Err(Error::NotBIBD);
    }
    let (c, d) = crate::estimator::qtq_closed_form(profile, params)?;
    let (c_prime, d_prime) = crate::estimator::invert_ci_dj(&c, &d, profile.v)?;
    Ok(int_u(profile.v) * (c_prime + d_prime))
}

/// The trace lower bound `(v-1)^2 / (f(k) - v) + 1/v` with
/// `f(x) = v^2 (x g^2 + v - x) / (x g + v - x)^2`.
pub fn cn_trace_bound(v: usize, k: usize, gamma: &Rat) -> Result<Rat> {
    if k == 0 || k >= v {
        return Err(Error::InvalidK { k, v });
    }
    if *gamma <= Rat::one() {
        return Err(Error::GammaNotGreaterThanOne);
    }
    let f_k = {
        let num = int_u(v * v) * (int_u(k) * gamma * gamma + int_u(v - k));
        let den = (int_u(k) * gamma + int_u(v - k)).pow(2);
        num / den
    };
    let denom = f_k - int_u(v);
    Ok(int_u((v - 1) * (v - 1)) / denom + Rat::one() / int_u(v))
}

/// Bits needed to transmit one randomised report: log2(m). Display only.
pub fn communication_cost(m: usize) -> f64 {
    assert!(m >= 1);
    (m as f64).log2()
}

/// Which formula route produced a variance figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceRoute {
    PerCoordinateSum,
    TotalClosedForm,
    PnlBibd,
    PnlRLambda,
    RiskTrace,
}

/// Full risk evaluation of a design, parameter set, input distribution, and
/// sample count; all routes are computed and cross-checked exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub per_coordinate: Vec<Rat>,
    pub total: Rat,
    pub route: VarianceRoute,
    pub bound_cn: Rat,
    pub bound_trace: Rat,
    pub information_trace: Rat,
    pub tight: bool,
    pub estimator_provenance: Provenance,
    pub estimator_variance: Rat,
    pub communication_cost: f64,
    pub t: u64,
}

impl Serialize for RiskReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("RiskReport", 15)?;
        let per: Vec<String> = self.per_coordinate.iter().map(rat_string).collect();
        let per_f: Vec<f64> = self.per_coordinate.iter().map(rat_f64).collect();
        s.serialize_field("per_coordinate", &per)?;
        s.serialize_field("per_coordinate_float", &per_f)?;
        s.serialize_field("total", &rat_string(&self.total))?;
        s.serialize_field("total_float", &rat_f64(&self.total))?;
        s.serialize_field("route", &self.route)?;
        s.serialize_field("bound_cn", &rat_string(&self.bound_cn))?;
        s.serialize_field("bound_cn_float", &rat_f64(&self.bound_cn))?;
        s.serialize_field("bound_trace", &rat_string(&self.bound_trace))?;
        s.serialize_field("information_trace", &rat_string(&self.information_trace))?;
        s.serialize_field("tight", &self.tight)?;
        s.serialize_field("estimator", &self.estimator_provenance)?;
        s.serialize_field("estimator_variance", &rat_string(&self.estimator_variance))?;
        s.serialize_field(
            "estimator_variance_float",
            &rat_f64(&self.estimator_variance),
        )?;
        s.serialize_field("communication_cost_float", &self.communication_cost)?;
        s.serialize_field("t", &self.t)?;
        s.end()
    }
}

/// Estimator selection for [`build_risk_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    ClosedForm,
    MoorePenrose,
    ChaiNayak,
}

/// Evaluates every variance route and bound for a pure design.
///
/// The per-coordinate formula, the closed-form total, the (r,lambda) ratio
/// form (plus the BIBD form when applicable), and the risk-trace identity for
/// the closed-form estimator are all computed and must agree exactly; any
/// disagreement is a bug, surfaced as a panic rather than an error value.
pub fn build_risk_report(
    system: &SetSystem,
    params: &ProtocolParams,
    pi: &Distribution,
    t: u64,
    choice: EstimatorChoice,
) -> Result<RiskReport> {
    let profile = system.classify();
    profile.r_lambda()?;
    if pi.len() != profile.v {
        return Err(Error::DimensionMismatch {
            expected: profile.v,
            got: pi.len(),
        });
    }
    let q = build_tpm(system, params)?;
    let rho = induced_distribution(&q, pi)?;

    let per_coordinate: Vec<Rat> = pi
        .probs()
        .iter()
        .map(|p| variance_coordinate(params, p, t))
        .collect::<Result<_>>()?;
    let summed: Rat = per_coordinate.iter().cloned().sum();
    let total = variance_total(params, pi, t)?;
    assert_eq!(summed, total, "per-coordinate sum disagrees with total");
    let pnl_rl = variance_pnl_rlambda(&profile, &params.gamma, pi, t)?;
    assert_eq!(pnl_rl, total, "ratio-form route disagrees with total");
    if profile.kind == DesignKind::Bibd {
        let pnl = variance_pnl_bibd(&profile, &params.gamma, pi, t)?;
        assert_eq!(pnl, total, "BIBD ratio-form route disagrees with total");
    }
    let closed = closed_form_estimator(system, params)?;
    let via_trace = variance_via_risk_trace(&closed, &rho, pi, t)?;
    assert_eq!(via_trace, total, "risk-trace route disagrees with total");

    let estimator = match choice {
        EstimatorChoice::ClosedForm => closed,
        EstimatorChoice::MoorePenrose => moore_penrose(&q, &profile, Some(params))?,
        EstimatorChoice::ChaiNayak => cn_optimal_estimator(&q, &rho)?,
    };
    let estimator_variance = variance_via_risk_trace(&estimator, &rho, pi, t)?;

    let bound_cn = cn_lower_bound(&q, &rho, pi, t)?;
    let information_trace = cn_information_trace(&q, &rho)?;
    let (bound_trace, tight) = if profile.kind == DesignKind::Bibd {
        let k = profile.block_size.expect("BIBD block size");
        let bound = cn_trace_bound(profile.v, k, &params.gamma)?;
        let tight = bound == information_trace;
        (bound, tight)
    } else {
        (Rat::zero(), false)
    };

    Ok(RiskReport {
        per_coordinate,
        total,
        route: VarianceRoute::TotalClosedForm,
        bound_cn,
        bound_trace,
        information_trace,
        tight,
        estimator_provenance: estimator.provenance(),
        estimator_variance,
        communication_cost: communication_cost(profile.b),
        t,
    })
}
