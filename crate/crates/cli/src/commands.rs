//! One function per subcommand; each returns the rendered output body.

use bdrr_core::rational::int;
use bdrr_core::{
    build_risk_report, build_tpm, catalog_descriptions, catalog_lookup, closed_form_estimator,
    cn_optimal_estimator, communication_cost, estimate_from_counts, monte_carlo, moore_penrose,
    params_from_gamma, params_from_theta, parse_rat, project_to_simplex, pure_check, rat_f64,
    rat_string, verify_ldp, CountVector, Distribution, EstimatorChoice, Provenance, PurityWitness,
    RandomiserSpec, Rat, SetSystem,
};
use serde_json::json;

use crate::io::{self, DesignFile};
use crate::{CliError, EstimatorArg, FormatArg, PrivacyArgs};

fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map_err(|e| CliError::internal(format!("serialization failed: {e}")))
}

/// 1-based rendering of a block for human-readable notes.
fn block_1based(block: &[usize]) -> String {
    let inner: Vec<String> = block.iter().map(|p| (p + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

pub fn catalog_list(format: FormatArg, out: Option<&str>) -> Result<(), CliError> {
    let body = match format {
        FormatArg::Json => {
            let entries: Vec<_> = catalog_descriptions()
                .into_iter()
                .map(|(name, description)| {
                    let system = catalog_lookup(name).expect("catalog entry");
                    json!({
                        "name": name,
                        "description": description,
                        "points": system.point_count(),
                        "blocks": system.block_count(),
                    })
                })
                .collect();
            to_json_string(&entries)?
        }
        FormatArg::Csv => {
            let mut lines = vec!["name,points,blocks,description".to_string()];
            for (name, description) in catalog_descriptions() {
                let system = catalog_lookup(name).expect("catalog entry");
                // descriptions contain commas
                lines.push(format!(
                    "{name},{},{},\"{description}\"",
                    system.point_count(),
                    system.block_count()
                ));
            }
            lines.join("\n")
        }
    };
    io::emit(out, &body)
}

pub fn catalog_show(name: &str, out: Option<&str>) -> Result<(), CliError> {
    let system = catalog_lookup(name)?;
    let file = DesignFile {
        name: Some(name.to_string()),
        points: system.point_count(),
        blocks: system.blocks().to_vec(),
    };
    io::emit(out, &to_json_string(&file)?)
}

pub fn verify(design: &str, out: Option<&str>) -> Result<(), CliError> {
    let (name, system) = io::resolve_design(design)?;
    let profile = system.classify();
    let check = pure_check(&system);
    let note = match &check.witness {
        None => format!("{name} is an (r,lambda)-design"),
        Some(PurityWitness::NonConstantReplication {
            point,
            count,
            expected,
        }) => format!(
            "point {} lies in {count} blocks where most points lie in {expected}",
            point + 1
        ),
        Some(PurityWitness::NonConstantPairIndex {
            pair,
            count,
            expected,
        }) => format!(
            "pair {} lies in {count} blocks where most pairs lie in {expected}",
            block_1based(&[pair.0, pair.1])
        ),
    };
    let body = json!({
        "design": name,
        "profile": profile,
        "pure": check.is_pure,
        "witness": check.witness,
        "note": note,
    });
    io::emit(out, &to_json_string(&body)?)
}

fn derive_params(
    system: &SetSystem,
    privacy: &PrivacyArgs,
) -> Result<bdrr_core::ProtocolParams, CliError> {
    let profile = system.classify();
    match (&privacy.theta, &privacy.gamma) {
        (Some(theta), None) => Ok(params_from_theta(&profile, &parse_rat(theta)?)?),
        (None, Some(gamma)) => Ok(params_from_gamma(&profile, &parse_rat(gamma)?)?),
        _ => Err(CliError::user(
            "exactly one of --theta or --gamma is required".into(),
        )),
    }
}

pub fn protocol(design: &str, privacy: &PrivacyArgs, out: Option<&str>) -> Result<(), CliError> {
    let (name, system) = io::resolve_design(design)?;
    let params = derive_params(&system, privacy)?;
    let q = build_tpm(&system, &params)?;
    let realized = verify_ldp(&q)?;
    let body = json!({
        "design": name,
        "v": system.point_count(),
        "b": system.block_count(),
        "params": params,
        "realized_ratio": rat_string(&realized),
        "realized_ratio_float": rat_f64(&realized),
        "communication_cost_float": communication_cost(system.block_count()),
        "tpm": q.to_string_rows(),
    });
    io::emit(out, &to_json_string(&body)?)
}

pub fn estimate(
    design: &str,
    privacy: &PrivacyArgs,
    counts_path: &str,
    estimator: EstimatorArg,
    project: bool,
    out: Option<&str>,
) -> Result<(), CliError> {
    let (name, system) = io::resolve_design(design)?;
    let params = derive_params(&system, privacy)?;
    let counts = io::read_counts(counts_path)?;
    if counts.counts().len() != system.block_count() {
        return Err(bdrr_core::Error::DimensionMismatch {
            expected: system.block_count(),
            got: counts.counts().len(),
        }
        .into());
    }
    let (estimate, provenance) = apply_estimator(&system, &params, &counts, estimator)?;
    let sum: Rat = estimate.iter().cloned().sum();
    let mut body = json!({
        "design": name,
        "t": counts.t(),
        "estimator": provenance,
        "estimate": estimate.iter().map(rat_string).collect::<Vec<_>>(),
        "estimate_float": estimate.iter().map(rat_f64).collect::<Vec<_>>(),
        "estimate_sum": rat_string(&sum),
        "estimate_sum_float": rat_f64(&sum),
    });
    if project {
        let projected = project_to_simplex(&estimate);
        body["projected"] = json!(projected.iter().map(rat_string).collect::<Vec<_>>());
        body["projected_float"] = json!(projected.iter().map(rat_f64).collect::<Vec<_>>());
    }
    io::emit(out, &to_json_string(&body)?)
}

fn apply_estimator(
    system: &SetSystem,
    params: &bdrr_core::ProtocolParams,
    counts: &CountVector,
    estimator: EstimatorArg,
) -> Result<(Vec<Rat>, Provenance), CliError> {
    match estimator {
        EstimatorArg::Closed => Ok((
            estimate_from_counts(system, params, counts)?,
            Provenance::ClosedForm,
        )),
        EstimatorArg::Mp => {
            let q = build_tpm(system, params)?;
            let l = moore_penrose(&q, &system.classify(), Some(params))?;
            Ok((l.apply(&counts.rho_hat())?, l.provenance()))
        }
        EstimatorArg::Cn => {
            let q = build_tpm(system, params)?;
            // weight by the empirical output distribution; zero counts make
            // the weighting singular and are rejected
            let rho_hat = Distribution::new(counts.rho_hat())?;
            let l = cn_optimal_estimator(&q, &rho_hat)?;
            Ok((l.apply(&counts.rho_hat())?, l.provenance()))
        }
    }
}

fn estimator_choice(arg: EstimatorArg) -> EstimatorChoice {
    match arg {
        EstimatorArg::Closed => EstimatorChoice::ClosedForm,
        EstimatorArg::Mp => EstimatorChoice::MoorePenrose,
        EstimatorArg::Cn => EstimatorChoice::ChaiNayak,
    }
}

#[allow(clippy::too_many_arguments)]
pub fn risk(
    design: &str,
    privacy: &PrivacyArgs,
    dist: &str,
    t: u64,
    estimator: EstimatorArg,
    sweep: Option<&str>,
    out: Option<&str>,
) -> Result<(), CliError> {
    let (name, system) = io::resolve_design(design)?;
    let pi = io::resolve_distribution(dist, system.point_count())?;
    if let Some(range) = sweep {
        return risk_sweep(&name, &system, &pi, t, estimator, range, out);
    }
    let params = derive_params(&system, privacy)?;
    let report = build_risk_report(&system, &params, &pi, t, estimator_choice(estimator))?;
    let body = json!({
        "design": name,
        "params": params,
        "report": report,
    });
    io::emit(out, &to_json_string(&body)?)
}

/// Variance-vs-theta sweep as plot-ready CSV; thetas with a non-positive
/// privacy gap are skipped.
fn risk_sweep(
    name: &str,
    system: &SetSystem,
    pi: &Distribution,
    t: u64,
    estimator: EstimatorArg,
    range: &str,
    out: Option<&str>,
) -> Result<(), CliError> {
    let parts: Vec<&str> = range.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::user(
            "--sweep-theta expects START,END,STEP".into(),
        ));
    }
    let start = parse_rat(parts[0])?;
    let end = parse_rat(parts[1])?;
    let step = parse_rat(parts[2])?;
    if step <= int(0) || start > end {
        return Err(CliError::user(
            "--sweep-theta needs START <= END and STEP > 0".into(),
        ));
    }
    let profile = system.classify();
    let mut lines = vec![
        "design,theta,gamma_float,total_float,bound_cn_float,estimator_variance_float,tight"
            .to_string(),
    ];
    let mut theta = start;
    while theta <= end {
        match params_from_theta(&profile, &theta) {
            Ok(params) => {
                let report =
                    build_risk_report(system, &params, pi, t, estimator_choice(estimator))?;
                lines.push(format!(
                    "{name},{},{},{},{},{},{}",
                    rat_string(&theta),
                    rat_f64(&params.gamma),
                    rat_f64(&report.total),
                    rat_f64(&report.bound_cn),
                    rat_f64(&report.estimator_variance),
                    report.tight,
                ));
            }
            Err(bdrr_core::Error::NonPositivePrivacyGap | bdrr_core::Error::ThetaOutOfRange) => {}
            Err(e) => return Err(e.into()),
        }
        theta += &step;
    }
    io::emit(out, &lines.join("\n"))
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    design: &str,
    privacy: &PrivacyArgs,
    dist: &str,
    t: u64,
    reps: u64,
    seed: u64,
    format: FormatArg,
    out: Option<&str>,
) -> Result<(), CliError> {
    let (name, system) = io::resolve_design(design)?;
    let pi = io::resolve_distribution(dist, system.point_count())?;
    let params = derive_params(&system, privacy)?;
    let spec = RandomiserSpec::new(system, params.clone())?;
    match format {
        FormatArg::Json => {
            let report = monte_carlo(&spec, &pi, t, reps, seed)?;
            let body = json!({
                "design": name,
                "params": params,
                "report": report,
            });
            io::emit(out, &to_json_string(&body)?)
        }
        FormatArg::Csv => {
            if reps < 2 {
                return Err(bdrr_core::Error::InvalidRepCount.into());
            }
            let estimator = closed_form_estimator(spec.design(), spec.params())?;
            let v = spec.design().point_count();
            let header: Vec<String> = std::iter::once("rep".to_string())
                .chain((0..v).map(|j| format!("p{j}")))
                .collect();
            let mut lines = vec![header.join(",")];
            for rep in 0..reps {
                let (_, estimate) = bdrr_core::run_rep(&spec, &pi, t, seed, rep, &estimator)?;
                let row: Vec<String> = std::iter::once(rep.to_string())
                    .chain(estimate.iter().map(|e| rat_f64(e).to_string()))
                    .collect();
                lines.push(row.join(","));
            }
            io::emit(out, &lines.join("\n"))
        }
    }
}
