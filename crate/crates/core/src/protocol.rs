//! Protocol parameters for design-based local randomisers, transition
//! probability matrices, and direct verification of the privacy ratio.
//!
//! The privacy ratio gamma = e^epsilon is the canonical privacy input; all
//! arithmetic stays rational. epsilon itself exists only as the display value
//! `ln(gamma)`.

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::design::{DesignProfile, SetSystem};
use crate::error::{Error, Result};
use crate::matrix::RationalMatrix;
use crate::rational::{int_u, rat_f64, rat_string, strictly_between_zero_and_one, Rat};

/// Exact parameters of a pure design-based protocol.
///
/// Invariants, enforced at construction: `alpha1 = theta/r`,
/// `alpha2 = (1-theta)/(b-r)`, `gamma = alpha1/alpha2 > 1`,
/// `p_star = theta`, `q_star = lambda*alpha1 + (r-lambda)*alpha2`,
/// and `p_star > q_star`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    pub theta: Rat,
    pub gamma: Rat,
    pub alpha1: Rat,
    pub alpha2: Rat,
    pub p_star: Rat,
    pub q_star: Rat,
}

impl ProtocolParams {
    /// Display-only privacy parameter `epsilon = ln(gamma)`.
    pub fn epsilon(&self) -> f64 {
        rat_f64(&self.gamma).ln()
    }

    /// `p_star - q_star`, the estimator gap.
    pub fn gap(&self) -> Rat {
        &self.p_star - &self.q_star
    }
}

impl Serialize for ProtocolParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ProtocolParams", 7)?;
        s.serialize_field("theta", &rat_string(&self.theta))?;
        s.serialize_field("gamma", &rat_string(&self.gamma))?;
        s.serialize_field("alpha1", &rat_string(&self.alpha1))?;
        s.serialize_field("alpha2", &rat_string(&self.alpha2))?;
        s.serialize_field("p_star", &rat_string(&self.p_star))?;
        s.serialize_field("q_star", &rat_string(&self.q_star))?;
        s.serialize_field("epsilon_float", &self.epsilon())?;
        s.end()
    }
}

/// Checks the profile is a usable (r,lambda)-design and returns (v, b, r, l).
fn pure_parameters(profile: &DesignProfile) -> Result<(usize, usize, usize, usize)> {
    let (r, l) = profile.r_lambda()?;
    if r == l {
        return Err(Error::DegenerateDesign {
            reason: format!("r = lambda = {r}"),
        });
    }
    if r == profile.b {
        return Err(Error::DegenerateDesign {
            reason: format!("every point lies in all {r} blocks"),
        });
    }
    Ok((profile.v, profile.b, r, l))
}

fn params_from_theta_r_b_lambda(
    theta: &Rat,
    r: usize,
    b: usize,
    l: usize,
) -> Result<ProtocolParams> {
    if !strictly_between_zero_and_one(theta) {
        return Err(Error::ThetaOutOfRange);
    }
    let alpha1 = theta / int_u(r);
    let alpha2 = (Rat::one() - theta) / int_u(b - r);
    if alpha1 <= alpha2 {
        return Err(Error::NonPositivePrivacyGap);
    }
    let gamma = &alpha1 / &alpha2;
    let q_star = &alpha1 * int_u(l) + &alpha2 * int_u(r - l);
    Ok(ProtocolParams {
        theta: theta.clone(),
        p_star: theta.clone(),
        gamma,
        alpha1,
        alpha2,
        q_star,
    })
}

/// Derives all protocol parameters from a pure profile and a target theta.
pub fn params_from_theta(profile: &DesignProfile, theta: &Rat) -> Result<ProtocolParams> {
    let (_, b, r, l) = pure_parameters(profile)?;
    params_from_theta_r_b_lambda(theta, r, b, l)
}

/// Derives parameters from a target privacy ratio gamma, assuming equality
/// in the privacy constraint: theta = r*gamma / (b + r*(gamma-1)).
pub fn params_from_gamma(profile: &DesignProfile, gamma: &Rat) -> Result<ProtocolParams> {
    let (_, b, r, l) = pure_parameters(profile)?;
    if *gamma <= Rat::one() {
        return Err(Error::GammaNotGreaterThanOne);
    }
    let denom = int_u(b) + int_u(r) * (gamma - Rat::one());
    let theta = int_u(r) * gamma / &denom;
    let params = params_from_theta_r_b_lambda(&theta, r, b, l)?;
    debug_assert_eq!(&params.gamma, gamma);
    debug_assert_eq!(params.alpha1, gamma / &denom);
    debug_assert_eq!(params.alpha2, Rat::one() / denom);
    Ok(params)
}

/// Builds the b-by-v transition probability matrix of a pure protocol:
/// entry (B, x) is alpha1 if x is in B, alpha2 otherwise.
pub fn build_tpm(system: &SetSystem, params: &ProtocolParams) -> Result<RationalMatrix> {
    let profile = system.classify();
    let rebuilt = params_from_theta(&profile, &params.theta).map_err(|e| match e {
        Error::NotPureDesign | Error::DegenerateDesign { .. } => Error::ParamMismatch {
            reason: "system is not a pure design".into(),
        },
        other => other,
    })?;
    if rebuilt != *params {
        return Err(Error::ParamMismatch {
            reason: "parameters were not derived from this design".into(),
        });
    }
    let b = system.block_count();
    let v = system.point_count();
    Ok(RationalMatrix::from_fn(b, v, |i, j| {
        if system.blocks()[i].binary_search(&j).is_ok() {
            params.alpha1.clone()
        } else {
            params.alpha2.clone()
        }
    }))
}

/// Builds the transition matrix of the general (not necessarily pure)
/// randomiser: column x puts theta/|Y_x| on the blocks containing x and
/// (1-theta)/(b-|Y_x|) elsewhere.
///
/// Only [`verify_ldp`] consumes these; estimator and risk operations require
/// a pure design.
pub fn build_tpm_raw(system: &SetSystem, theta: &Rat) -> Result<RationalMatrix> {
    if !strictly_between_zero_and_one(theta) {
        return Err(Error::ThetaOutOfRange);
    }
    let b = system.block_count();
    let repl = system.replication_counts();
    if let Some(x) = repl.iter().position(|&r| r == b) {
        return Err(Error::DegenerateDesign {
            reason: format!("point {x} lies in every block"),
        });
    }
    let one = Rat::one();
    let high: Vec<Rat> = repl.iter().map(|&r| theta / int_u(r)).collect();
    let low: Vec<Rat> = repl
        .iter()
        .map(|&r| (&one - theta) / int_u(b - r))
        .collect();
    Ok(RationalMatrix::from_fn(b, system.point_count(), |i, j| {
        if system.blocks()[i].binary_search(&j).is_ok() {
            high[j].clone()
        } else {
            low[j].clone()
        }
    }))
}

/// Checks a transition matrix and returns its realised privacy ratio: the
/// maximum over rows of (row max / row min).
pub fn verify_ldp(q: &RationalMatrix) -> Result<Rat> {
    for i in 0..q.rows() {
        for j in 0..q.cols() {
            let e = q.get(i, j);
            if e.is_negative() {
                return Err(Error::NonPositiveEntry { row: i, col: j });
            }
            if e.is_zero() {
                return Err(Error::InfiniteRatio { row: i, col: j });
            }
        }
    }
    for j in 0..q.cols() {
        let sum = q.column_sum(j);
        if !sum.is_one() {
            return Err(Error::NotColumnStochastic {
                col: j,
                sum: rat_string(&sum),
            });
        }
    }
    let mut worst = Rat::one();
    for i in 0..q.rows() {
        let row = q.row(i);
        let max = row.iter().max().unwrap();
        let min = row.iter().min().unwrap();
        let ratio = max / min;
        if ratio > worst {
            worst = ratio;
        }
    }
    Ok(worst)
}

/// Why a system fails to be an (r,lambda)-design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PurityWitness {
    /// A point whose replication deviates from the most common value.
    NonConstantReplication {
        point: usize,
        count: usize,
        expected: usize,
    },
    /// A point pair whose index deviates from the most common value.
    NonConstantPairIndex {
        pair: (usize, usize),
        count: usize,
        expected: usize,
    },
}

/// Result of the purity test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PurityCheck {
    pub is_pure: bool,
    pub witness: Option<PurityWitness>,
}

/// Most common value; ties broken toward the smaller value.
fn mode(values: &[usize]) -> usize {
    let mut counts = std::collections::BTreeMap::new();
    for &v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(v, _)| v)
        .unwrap()
}

/// Tests whether the system is an (r,lambda)-design; on failure returns a
/// deviant point or pair as evidence.
pub fn pure_check(system: &SetSystem) -> PurityCheck {
    let repl = system.replication_counts();
    let r0 = mode(&repl);
    if let Some(point) = repl.iter().position(|&c| c != r0) {
        return PurityCheck {
            is_pure: false,
            witness: Some(PurityWitness::NonConstantReplication {
                point,
                count: repl[point],
                expected: r0,
            }),
        };
    }
    let v = system.point_count();
    let mut pairs = Vec::new();
    let mut counts = Vec::new();
    for i in 0..v {
        for j in (i + 1)..v {
            let c = system
                .blocks()
                .iter()
                .filter(|b| b.binary_search(&i).is_ok() && b.binary_search(&j).is_ok())
                .count();
            pairs.push((i, j));
            counts.push(c);
        }
    }
    let l0 = mode(&counts);
    if let Some(k) = counts.iter().position(|&c| c != l0) {
        return PurityCheck {
            is_pure: false,
            witness: Some(PurityWitness::NonConstantPairIndex {
                pair: pairs[k],
                count: counts[k],
                expected: l0,
            }),
        };
    }
    PurityCheck {
        is_pure: true,
        witness: None,
    }
}

fn check_ordered_pair(system: &SetSystem, x: usize, x_prime: usize) -> Result<()> {
    let v = system.point_count();
    if x >= v || x_prime >= v {
        return Err(Error::IndexOutOfRange {
            block: 0,
            index: x.max(x_prime),
            points: v,
        });
    }
    if x == x_prime {
        return Err(Error::SamePoint);
    }
    Ok(())
}

/// The false-positive probability Prob[f(x') lands in Y_x], evaluated in the
/// dual by summing the randomiser's output probabilities directly. Exact for
/// any valid system, pure or not.
pub fn qstar_bruteforce(system: &SetSystem, theta: &Rat, x: usize, x_prime: usize) -> Result<Rat> {
    check_ordered_pair(system, x, x_prime)?;
    let duals = system.dual_blocks();
    let yx = &duals[x];
    let yxp = &duals[x_prime];
    let m = system.block_count();
    if yxp.len() == m {
        return Err(Error::DegenerateDesign {
            reason: format!("point {x_prime} lies in every block"),
        });
    }
    let high = theta / int_u(yxp.len());
    let low = (Rat::one() - theta) / int_u(m - yxp.len());
    Ok(yx
        .iter()
        .map(|y| {
            if yxp.binary_search(y).is_ok() {
                high.clone()
            } else {
                low.clone()
            }
        })
        .sum())
}

/// The two theta-coefficients of the pure-protocol criterion for the ordered
/// pair (x, x'): with `l = |Y_x|` and `mu = |Y_x intersect Y_x'|`, returns
/// `(slope, intercept) = (mu/l - (l-mu)/(m-l), (l-mu)/(m-l))`.
///
/// A system is an (r,lambda)-design exactly when these coefficients agree
/// across all ordered pairs; this is the authoritative theta-independent
/// purity criterion. On pure designs `slope * theta + intercept` equals the
/// false-positive probability; on non-pure systems it is a diagnostic
/// quantity, not a probability (see [`qstar_bruteforce`] for that).
pub fn qstar_coefficients(system: &SetSystem, x: usize, x_prime: usize) -> Result<(Rat, Rat)> {
    check_ordered_pair(system, x, x_prime)?;
    let duals = system.dual_blocks();
    let yx = &duals[x];
    let yxp = &duals[x_prime];
    let m = system.block_count();
    if yx.len() == m {
        return Err(Error::DegenerateDesign {
            reason: format!("point {x} lies in every block"),
        });
    }
    let inter = yx.iter().filter(|b| yxp.binary_search(b).is_ok()).count();
    let outside = yx.len() - inter;
    let hit = int_u(inter) / int_u(yx.len());
    let miss = int_u(outside) / int_u(m - yx.len());
    Ok((hit - &miss, miss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::catalog_lookup;
    use crate::rational::{int, ratio};

    fn params(name: &str, theta: Rat) -> ProtocolParams {
        let profile = catalog_lookup(name).unwrap().classify();
        params_from_theta(&profile, &theta).unwrap()
    }

    #[test]
    fn pairs_4_at_three_quarters() {
        let p = params("pairs-4", ratio(3, 4));
        assert_eq!(p.p_star, ratio(3, 4));
        assert_eq!(p.q_star, ratio(5, 12));
        assert_eq!(p.alpha1, ratio(1, 4));
        assert_eq!(p.alpha2, ratio(1, 12));
        assert_eq!(p.gamma, int(3));
    }

    #[test]
    fn ag23_at_three_quarters() {
        let p = params("ag23", ratio(3, 4));
        assert_eq!(p.alpha1, ratio(3, 16));
        assert_eq!(p.alpha2, ratio(1, 32));
        assert_eq!(p.gamma, int(6));
        assert_eq!(p.q_star, ratio(9, 32));
        assert!((p.epsilon() - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn fano_minus_point_qstar_closed_form() {
        // q*(theta) = theta*lambda/r + (1-theta)(r-lambda)/(b-r) = (3-theta)/6;
        // the gap is positive only for theta > 3/7
        for theta in [
            ratio(1, 2),
            ratio(5, 9),
            ratio(2, 3),
            ratio(3, 4),
            ratio(9, 10),
        ] {
            let p = params("fano-minus-point", theta.clone());
            assert_eq!(p.q_star, (int(3) - &theta) / int(6));
        }
    }

    #[test]
    fn theta_gamma_round_trip() {
        for name in ["warner", "pairs-4", "fano", "fano-minus-point", "ag23"] {
            let profile = catalog_lookup(name).unwrap().classify();
            for theta in [ratio(1, 3), ratio(3, 5), ratio(3, 4)] {
                let a = match params_from_theta(&profile, &theta) {
                    Ok(p) => p,
                    Err(Error::NonPositivePrivacyGap) => continue,
                    Err(e) => panic!("{name}: {e}"),
                };
                let b = params_from_gamma(&profile, &a.gamma).unwrap();
                assert_eq!(a, b, "{name} theta={theta}");
                let c = params_from_theta(&profile, &b.theta).unwrap();
                assert_eq!(a, c);
            }
        }
    }

    #[test]
    fn gamma_closed_forms() {
        let profile = catalog_lookup("ag23").unwrap().classify();
        let p = params_from_gamma(&profile, &int(6)).unwrap();
        assert_eq!(p.theta, ratio(3, 4));

        let profile = catalog_lookup("steiner25").unwrap().classify();
        let p = params_from_gamma(&profile, &ratio(21, 4)).unwrap();
        // b + r(gamma-1) = 84
        assert_eq!(p.alpha1, ratio(1, 16));
        assert_eq!(p.alpha2, ratio(1, 84));
        assert_eq!(p.theta, ratio(1, 2));
        assert_eq!(&p.alpha1 / &p.alpha2, ratio(21, 4));

        assert_eq!(
            params_from_gamma(&profile, &int(1)).unwrap_err(),
            Error::GammaNotGreaterThanOne
        );
    }

    #[test]
    fn degenerate_parameter_requests_error() {
        let warner = catalog_lookup("warner").unwrap().classify();
        // theta = 1/2 on warner gives p* = q*
        assert_eq!(
            params_from_theta(&warner, &ratio(1, 2)).unwrap_err(),
            Error::NonPositivePrivacyGap
        );
        assert_eq!(
            params_from_theta(&warner, &int(1)).unwrap_err(),
            Error::ThetaOutOfRange
        );
        let general = SetSystem::new(3, vec![vec![0, 1], vec![1, 2]])
            .unwrap()
            .classify();
        assert_eq!(
            params_from_theta(&general, &ratio(3, 4)).unwrap_err(),
            Error::NotPureDesign
        );
    }

    #[test]
    fn pure_identities_hold() {
        // p* = alpha1 r, q* = alpha1 lambda + alpha2 (r - lambda),
        // p* - q* = (r - lambda)(alpha1 - alpha2)
        for name in [
            "warner",
            "pairs-4",
            "fano",
            "fano-minus-point",
            "ag23",
            "steiner25",
        ] {
            let profile = catalog_lookup(name).unwrap().classify();
            let (r, l) = profile.r_lambda().unwrap();
            for theta in [ratio(2, 3), ratio(3, 4)] {
                let p = params_from_theta(&profile, &theta).unwrap();
                assert_eq!(p.p_star, &p.alpha1 * int_u(r));
                assert_eq!(p.q_star, &p.alpha1 * int_u(l) + &p.alpha2 * int_u(r - l));
                assert_eq!(p.gap(), (&p.alpha1 - &p.alpha2) * int_u(r - l), "{name}");
            }
        }
    }

    #[test]
    fn warner_tpm_is_symmetric_randomised_response() {
        let s = catalog_lookup("warner").unwrap();
        let p = params("warner", ratio(3, 4));
        let q = build_tpm(&s, &p).unwrap();
        assert_eq!(q.get(0, 0), &ratio(3, 4));
        assert_eq!(q.get(0, 1), &ratio(1, 4));
        assert_eq!(q.get(1, 0), &ratio(1, 4));
        assert_eq!(q.get(1, 1), &ratio(3, 4));
    }

    #[test]
    fn tpm_columns_are_stochastic_and_ratio_matches_gamma() {
        for name in ["warner", "pairs-4", "fano", "fano-minus-point", "ag23"] {
            let s = catalog_lookup(name).unwrap();
            let p = params(name, ratio(3, 4));
            let q = build_tpm(&s, &p).unwrap();
            for j in 0..q.cols() {
                assert!(q.column_sum(j).is_one(), "{name} col {j}");
            }
            assert_eq!(verify_ldp(&q).unwrap(), p.gamma, "{name}");
        }
    }

    #[test]
    fn pairs_4_tpm_column_follows_incidence() {
        // column 0: alpha1 on the three blocks containing point 0, alpha2 on
        // the rest
        let s = catalog_lookup("pairs-4").unwrap();
        let p = params("pairs-4", ratio(3, 4));
        let q = build_tpm(&s, &p).unwrap();
        for row in 0..6 {
            let expected = if row < 3 { &p.alpha1 } else { &p.alpha2 };
            assert_eq!(q.get(row, 0), expected, "row {row}");
        }
    }

    #[test]
    fn tpm_rewrite_in_p_q_form_matches() {
        // Q = ((p*-q*)/(r-l)) A + (p*/r - (p*-q*)/(r-l)) J
        for name in ["pairs-4", "fano-minus-point", "ag23"] {
            let s = catalog_lookup(name).unwrap();
            let profile = s.classify();
            let (r, l) = profile.r_lambda().unwrap();
            let p = params(name, ratio(2, 3));
            let q = build_tpm(&s, &p).unwrap();
            let a = s.incidence_matrix().into_matrix();
            let coeff_a = p.gap() / int_u(r - l);
            let coeff_j = &p.p_star / int_u(r) - &coeff_a;
            let j = RationalMatrix::ones(q.rows(), q.cols());
            let rebuilt = a.scale(&coeff_a).add(&j.scale(&coeff_j)).unwrap();
            assert_eq!(q, rebuilt, "{name}");
        }
    }

    #[test]
    fn param_mismatch_is_rejected() {
        let ag23 = catalog_lookup("ag23").unwrap();
        let foreign = params("pairs-4", ratio(3, 4));
        assert!(matches!(
            build_tpm(&ag23, &foreign).unwrap_err(),
            Error::ParamMismatch { .. }
        ));
    }

    #[test]
    fn verify_ldp_on_hand_built_matrices() {
        let uniform = RationalMatrix::from_rows(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 2), ratio(1, 2)],
        ])
        .unwrap();
        assert_eq!(verify_ldp(&uniform).unwrap(), int(1));

        let with_zero =
            RationalMatrix::from_rows(vec![vec![int(1), ratio(1, 2)], vec![int(0), ratio(1, 2)]])
                .unwrap();
        assert_eq!(
            verify_ldp(&with_zero).unwrap_err(),
            Error::InfiniteRatio { row: 1, col: 0 }
        );

        let bad_sum = RationalMatrix::from_rows(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 4), ratio(1, 2)],
        ])
        .unwrap();
        assert!(matches!(
            verify_ldp(&bad_sum).unwrap_err(),
            Error::NotColumnStochastic { col: 0, .. }
        ));
    }

    #[test]
    fn raw_tpm_matches_pure_tpm_on_designs() {
        for name in ["pairs-4", "fano-minus-point", "ag23"] {
            let s = catalog_lookup(name).unwrap();
            let p = params(name, ratio(3, 4));
            assert_eq!(
                build_tpm_raw(&s, &ratio(3, 4)).unwrap(),
                build_tpm(&s, &p).unwrap(),
                "{name}"
            );
        }
    }

    #[test]
    fn raw_tpm_on_general_system_verifies() {
        let s = SetSystem::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        let q = build_tpm_raw(&s, &ratio(3, 4)).unwrap();
        // columns stochastic even for non-pure systems
        let ratio_seen = verify_ldp(&q).unwrap();
        assert!(ratio_seen > int(1));

        // a point in every block leaves no low-probability outputs
        let degenerate = SetSystem::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert!(matches!(
            build_tpm_raw(&degenerate, &ratio(3, 4)).unwrap_err(),
            Error::DegenerateDesign { .. }
        ));
    }

    #[test]
    fn pure_check_witnesses() {
        assert!(pure_check(&catalog_lookup("ag23").unwrap()).is_pure);
        let s = SetSystem::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let check = pure_check(&s);
        assert!(!check.is_pure);
        assert_eq!(
            check.witness,
            Some(PurityWitness::NonConstantReplication {
                point: 1,
                count: 2,
                expected: 1
            })
        );
    }

    #[test]
    fn qstar_bruteforce_on_pairs_4() {
        let s = catalog_lookup("pairs-4").unwrap();
        // symbolic (2 - theta) / 3 via coefficients
        let (slope, intercept) = qstar_coefficients(&s, 0, 1).unwrap();
        assert_eq!(slope, ratio(-1, 3));
        assert_eq!(intercept, ratio(2, 3));
        assert_eq!(
            qstar_bruteforce(&s, &ratio(3, 4), 0, 1).unwrap(),
            ratio(5, 12)
        );
        assert_eq!(
            qstar_bruteforce(&s, &ratio(3, 4), 0, 0).unwrap_err(),
            Error::SamePoint
        );
    }

    #[test]
    fn qstar_bruteforce_on_warner_is_one_minus_theta() {
        let s = catalog_lookup("warner").unwrap();
        for theta in [ratio(1, 4), ratio(1, 2), ratio(3, 4)] {
            assert_eq!(
                qstar_bruteforce(&s, &theta, 0, 1).unwrap(),
                Rat::one() - &theta
            );
            assert_eq!(
                qstar_bruteforce(&s, &theta, 1, 0).unwrap(),
                Rat::one() - &theta
            );
        }
    }

    #[test]
    fn qstar_bruteforce_constant_on_fano_minus_point() {
        // all 42 ordered pairs agree with the closed form (3 - theta)/6
        let s = catalog_lookup("fano-minus-point").unwrap();
        for theta in [ratio(1, 2), ratio(3, 4)] {
            let expected = (int(3) - &theta) / int(6);
            for x in 0..6 {
                for xp in 0..6 {
                    if x != xp {
                        assert_eq!(
                            qstar_bruteforce(&s, &theta, x, xp).unwrap(),
                            expected,
                            "pair ({x},{xp}) at theta={theta}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn two_point_edge_case_needs_the_coefficient_criterion() {
        // blocks {0},{1},{0}: the false-positive probability is 1-theta for
        // both ordered pairs even though replication is not constant, so raw
        // probability constancy cannot discriminate here; the coefficient
        // criterion can
        let s = SetSystem::new(2, vec![vec![0], vec![1], vec![0]]).unwrap();
        assert!(!pure_check(&s).is_pure);
        let theta = ratio(2, 3);
        assert_eq!(
            qstar_bruteforce(&s, &theta, 0, 1).unwrap(),
            qstar_bruteforce(&s, &theta, 1, 0).unwrap()
        );
        assert_ne!(
            qstar_coefficients(&s, 0, 1).unwrap(),
            qstar_coefficients(&s, 1, 0).unwrap()
        );
    }

    #[test]
    fn qstar_constancy_iff_pure_on_catalog_and_small_systems() {
        let mut cases: Vec<SetSystem> = crate::design::catalog_names()
            .iter()
            .map(|n| catalog_lookup(n).unwrap())
            .collect();
        cases.push(SetSystem::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap());
        cases
            .push(SetSystem::new(5, vec![vec![0, 1], vec![2, 3], vec![0, 4], vec![1, 2]]).unwrap());
        for s in &cases {
            let v = s.point_count();
            let mut coeffs = None;
            let mut constant = true;
            'outer: for x in 0..v {
                for xp in 0..v {
                    if x == xp {
                        continue;
                    }
                    match qstar_coefficients(s, x, xp) {
                        Ok(c) => match &coeffs {
                            None => coeffs = Some(c),
                            Some(first) => {
                                if *first != c {
                                    constant = false;
                                    break 'outer;
                                }
                            }
                        },
                        Err(_) => {
                            constant = false;
                            break 'outer;
                        }
                    }
                }
            }
            assert_eq!(constant, pure_check(s).is_pure);
        }
    }
}
