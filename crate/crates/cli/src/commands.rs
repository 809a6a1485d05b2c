use std::f64::consts::PI;

use gbs_core::analysis::{
    coherent_limit_scan, number_limit_scan, phased_eigenstate, photon_statistics, squeezed_limit_scan, time_evolve,
    LimitSchedule,
};
use gbs_core::binomial::{binomial_amplitudes, binomial_distribution, ladder_residual};
use gbs_core::fock::fidelity;
use gbs_core::gbs::{constraint_roots, solve};
use gbs_core::oracle::compare;
use gbs_core::verify::{run, VerifyConfig, CRITERIA};
use gbs_core::{BinomialParams, GbsParams, RootPolicy, SolutionKind, C64};
use serde_json::json;

use crate::error::CliError;
use crate::record::{Cell, RunRecord, Table};

/// What a command produced. `failure` is set when the run finished but a
/// built-in check did not hold; the record is still written.
pub struct Output {
    pub record: RunRecord,
    pub table: Table,
    pub failure: Option<String>,
}

fn complex_rows(values: &[C64], index_name: &'static str) -> Table {
    Table {
        header: vec![index_name, "re", "im"],
        rows: values
            .iter()
            .enumerate()
            .map(|(i, z)| vec![Cell::Int(i as i64), Cell::Real(z.re), Cell::Real(z.im)])
            .collect(),
    }
}

pub fn binomial(eta: f64, m: usize) -> Result<Output, CliError> {
    let p = BinomialParams::new(eta, m)?;
    let state = binomial_amplitudes(&p);
    let amplitudes: Vec<f64> = state.as_slice().iter().map(|z| z.re).collect();
    let distribution = binomial_distribution(&p);
    let ladder = (eta > 0.0 && eta < 1.0).then(|| ladder_residual(&p)).transpose()?;
    let table = Table {
        header: vec!["n", "amplitude", "probability"],
        rows: amplitudes
            .iter()
            .zip(&distribution)
            .enumerate()
            .map(|(n, (a, q))| vec![Cell::Int(n as i64), Cell::Real(*a), Cell::Real(*q)])
            .collect(),
    };
    let record = RunRecord::new(
        "binomial",
        p,
        json!({
            "amplitudes": amplitudes,
            "distribution": distribution,
            "statistics": photon_statistics(&state)?,
        }),
        json!({ "ladder_residual": ladder }),
    )?;
    Ok(Output {
        record,
        table,
        failure: None,
    })
}

pub fn gbs(p: GbsParams, policy: RootPolicy, k: Option<usize>, tol_scale: f64) -> Result<Output, CliError> {
    let sol = solve(&p, policy)?;
    let eigenstate = match k {
        Some(k) => {
            let max = sol.eigenstates.len() - 1;
            let v = sol
                .eigenstates
                .get(k)
                .ok_or(gbs_core::GbsError::IndexOutOfRange { k, max })?;
            Some(json!({ "k": k, "amplitudes": v.as_slice() }))
        }
        None => None,
    };
    let report = compare(&p, &sol)?;
    let passed = report.within_tolerance(tol_scale);
    let failure = (!passed).then(|| {
        if report.multiplicity_collapse {
            "defective operator (A0 = 0): the closed form has a single eigenvector and cannot be checked against the oracle"
                .to_string()
        } else {
            format!(
                "oracle mismatch: pair error {:e} (bound {:e}), residual {:e} (bound {:e})",
                report.max_pair_error,
                tol_scale * report.pair_tolerance(),
                report.max_residual,
                tol_scale * 1e-10 * report.operator_norm
            )
        }
    });
    let (r1, r2) = constraint_roots(&p);
    let record = RunRecord::new(
        "gbs",
        json!({ "gbs": p, "root": policy, "k": k }),
        json!({
            "delta_roots": [r1, r2],
            "delta": sol.delta_root,
            "zeta": { "r": sol.zeta.r, "theta": sol.zeta.theta, "value": sol.zeta.zeta() },
            "triple": sol.triple,
            "kind": sol.kind,
            "spectrum": sol.eigenvalues,
            "eigenstate": eigenstate,
            "oracle": {
                "eigenvalues": report.oracle_eigenvalues,
                "pairing": report.pairing,
                "max_pair_error": report.max_pair_error,
                "max_residual": report.max_residual,
                "operator_norm": report.operator_norm,
                "passed": passed,
            },
        }),
        json!({
            "kind": sol.kind,
            "degenerate": sol.kind == SolutionKind::DegenerateAPlusZero,
            "tol_scale": tol_scale,
            "pair_tolerance": tol_scale * report.pair_tolerance(),
            "residual_tolerance": tol_scale * 1e-10 * report.operator_norm,
            "multiplicity_collapse": report.multiplicity_collapse,
        }),
    )?;
    Ok(Output {
        record,
        table: complex_rows(&sol.eigenvalues, "k"),
        failure,
    })
}

fn scan_table(rows: impl Iterator<Item = (Cell, f64, f64)>) -> Table {
    Table {
        header: vec!["m_or_eta", "fidelity", "residual"],
        rows: rows.map(|(x, f, r)| vec![x, Cell::Real(f), Cell::Real(r)]).collect(),
    }
}

pub fn limit_number(mu: C64, nu: C64, m: usize, k: usize, etas: &[f64]) -> Result<Output, CliError> {
    if etas.is_empty() {
        return Err(CliError::Input("the eta schedule is empty".into()));
    }
    let points = number_limit_scan(mu, nu, m, k, etas)?;
    let table = scan_table(points.iter().map(|p| (Cell::Real(p.eta), p.fidelity, p.residual)));
    let record = RunRecord::new(
        "limit-number",
        json!({ "mu": mu, "nu": nu, "m": m, "k": k, "etas": etas }),
        json!({ "points": points }),
        json!({ "monotone": points.windows(2).all(|w| w[1].fidelity >= w[0].fidelity) }),
    )?;
    Ok(Output {
        record,
        table,
        failure: None,
    })
}

pub fn limit_squeezed(mu: C64, nu: C64, schedule: LimitSchedule) -> Result<Output, CliError> {
    let scan = squeezed_limit_scan(mu, nu, &schedule)?;
    let table = scan_table(
        scan.points
            .iter()
            .map(|p| (Cell::Int(p.m as i64), p.fidelity, p.residual)),
    );
    let record = RunRecord::new(
        "limit-squeezed",
        json!({ "mu": mu, "nu": nu, "schedule": schedule }),
        json!({ "points": scan.points, "verdict": scan.verdict }),
        json!({ "residual_nonincreasing": scan.points.windows(2).all(|w| w[1].residual <= w[0].residual) }),
    )?;
    Ok(Output {
        record,
        table,
        failure: None,
    })
}

pub fn limit_coherent(phi: f64, schedule: LimitSchedule) -> Result<Output, CliError> {
    let points = coherent_limit_scan(phi, &schedule)?;
    let table = scan_table(points.iter().map(|p| (Cell::Int(p.m as i64), p.fidelity, p.residual)));
    let record = RunRecord::new(
        "limit-coherent",
        json!({ "phi": phi, "schedule": schedule }),
        json!({ "points": points }),
        json!({ "increasing": points.windows(2).all(|w| w[1].fidelity > w[0].fidelity) }),
    )?;
    Ok(Output {
        record,
        table,
        failure: None,
    })
}

/// Fidelity below `1 - 1e-12` (scaled) between the evolved state and the
/// state rebuilt at the shifted phase counts as a verification failure.
pub const EVOLVE_INFIDELITY: f64 = 1e-12;

pub fn evolve(eta: f64, m: usize, k: usize, phi: f64, omega: f64, t: f64, tol_scale: f64) -> Result<Output, CliError> {
    if !(omega.is_finite() && t.is_finite() && phi.is_finite()) {
        return Err(CliError::Input("phi, omega and t must be finite".into()));
    }
    let input = phased_eigenstate(eta, phi, m, k)?;
    let evolved = time_evolve(&input, omega, t);
    let rebuilt = phased_eigenstate(eta, phi + omega * t, m, k)?;
    let shift_fidelity = fidelity(&evolved, &rebuilt)?;
    let input_fidelity = fidelity(&evolved, &input)?;
    let bound = 1.0 - tol_scale * EVOLVE_INFIDELITY;
    let failure = (shift_fidelity < bound).then(|| format!("phase-shift fidelity {shift_fidelity} is below {bound}"));
    let record = RunRecord::new(
        "evolve",
        json!({ "eta": eta, "m": m, "k": k, "phi": phi, "omega": omega, "t": t }),
        json!({
            "amplitudes": evolved.as_slice(),
            "phase_shift_fidelity": shift_fidelity,
            "fidelity_with_input": input_fidelity,
            "periods": omega * t / (2.0 * PI),
        }),
        json!({ "fidelity_bound": bound, "tol_scale": tol_scale }),
    )?;
    Ok(Output {
        record,
        table: complex_rows(evolved.as_slice(), "n"),
        failure,
    })
}

pub fn verify(criteria: &[u8], seed: u64, tol_scale: f64) -> Result<Output, CliError> {
    let ids: Vec<u8> = if criteria.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        criteria.to_vec()
    };
    let cfg = VerifyConfig { tol_scale, seed };
    let outcomes = ids
        .iter()
        .map(|&id| run(id, &cfg).ok_or_else(|| CliError::Input(format!("unknown criterion {id} (expected 1..=10)"))))
        .collect::<Result<Vec<_>, _>>()?;
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id).collect();
    let table = Table {
        header: vec!["id", "title", "passed", "summary"],
        rows: outcomes
            .iter()
            .map(|o| {
                vec![
                    Cell::Int(o.id as i64),
                    Cell::Text(o.title.clone()),
                    Cell::Text(o.passed().to_string()),
                    Cell::Text(o.summary_line()),
                ]
            })
            .collect(),
    };
    let record = RunRecord::new(
        "verify",
        json!({ "criteria": ids, "seed": seed }),
        json!({
            "outcomes": outcomes,
            "passed": outcomes.iter().map(|o| o.passed()).collect::<Vec<_>>(),
        }),
        json!({ "tol_scale": tol_scale, "failed": failed }),
    )?;
    let failure = (!failed.is_empty()).then(|| format!("criteria {failed:?} failed"));
    Ok(Output { record, table, failure })
}
