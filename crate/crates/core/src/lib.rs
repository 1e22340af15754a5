//! Local-differential-privacy protocols built from combinatorial block
//! designs.
//!
//! The pipeline: a [`design::SetSystem`] is classified
//! ([`design::DesignProfile`]); a pure design plus a privacy target yields
//! exact [`protocol::ProtocolParams`] and a transition probability matrix;
//! [`estimator`] constructs unbiased left-inverse estimators; [`risk`]
//! evaluates exact variances and lower bounds through several independent
//! formula routes; [`simulate`] checks it all against Monte Carlo sampling.
//!
//! All analytic arithmetic is exact rational ([`rational::Rat`]); floats
//! exist only in display fields and simulation summaries.

pub mod design;
pub mod error;
pub mod estimator;
pub mod matrix;
pub mod protocol;
pub mod rational;
pub mod risk;
pub mod simulate;

pub use design::{
    catalog_descriptions, catalog_lookup, catalog_names, k_subset_design, DesignKind,
    DesignProfile, IncidenceMatrix, SetSystem,
};
pub use error::{Error, Result};
pub use estimator::{
    closed_form_estimator, cn_optimal_estimator, estimate_from_counts, gap_coefficients,
    invert_ci_dj, moore_penrose, project_to_simplex, qtq_closed_form, CountVector, EstimatorMatrix,
    Provenance,
};
pub use matrix::RationalMatrix;
pub use protocol::{
    build_tpm, build_tpm_raw, params_from_gamma, params_from_theta, pure_check, qstar_bruteforce,
    qstar_coefficients, verify_ldp, ProtocolParams, PurityCheck, PurityWitness,
};
pub use rational::{parse_rat, rat_f64, rat_string, Rat};
pub use risk::{
    build_risk_report, cn_information_trace, cn_lower_bound, cn_trace_bound, communication_cost,
    induced_distribution, risk_trace, trace_uniform_bibd, variance_coordinate, variance_pnl_bibd,
    variance_pnl_rlambda, variance_total, variance_via_risk_trace, Distribution, EstimatorChoice,
    RiskReport, VarianceRoute,
};
pub use simulate::{
    monte_carlo, perturb, run_rep, run_trial, RandomiserSpec, SimulationReport, SplitMix64,
};
