//! Validation and execution of each subcommand.

use std::f64::consts::{PI, TAU};

use serde_json::{json, Value};

use precision_atlas_core::infometrics::{
    self, asymptotics, metric_report, precision_large_n, AsymptoticKind, Table2Request,
};
use precision_atlas_core::models::{
    binomial_model, deterministic_model, qpea_model, single_shot_mz, trinomial_batch_model, EstimationModel,
};
use precision_atlas_core::protocol::{build_canonical, protocol_precision, run, sample};
use precision_atlas_core::spin::{collective_observable, epsilon_for, outcome_bound};
use precision_atlas_core::symmetry::{count_distinct_eigenvalues, irreducibility_reports};
use precision_atlas_core::{HermitianObservable, LogBase};

use crate::args::{BaseArg, Cli, Command, ModelName, Panel};
use crate::output::Table;

/// Environment variable that replaces the default register-size caps.
pub const MAX_N_ENV: &str = "PRECISION_ATLAS_MAX_N";
pub const DEFAULT_SPECTRUM_MAX_N: usize = 12;
pub const DEFAULT_IRREDUCIBILITY_MAX_N: usize = 7;
pub const DEFAULT_PROTOCOL_SPIN_MAX_N: usize = 8;
pub const MAX_PROTOCOL_M: usize = 4096;
pub const MAX_FIG1_POINTS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Compute(#[from] precision_atlas_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Compute(_) => "computation",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Everything a command produces before it is wrapped in a run record.
pub struct Output {
    pub params: Value,
    pub results: Value,
    pub tolerances: Value,
    pub table: Table,
}

/// Register-size caps in force for this invocation.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub spectrum: usize,
    pub irreducibility: usize,
    pub protocol_spin: usize,
}

impl Limits {
    pub fn resolve(allow_large: bool, env_value: Option<&str>) -> Result<Self, CliError> {
        if allow_large {
            // the library still rejects sizes it cannot represent
            return Ok(Self {
                spectrum: usize::MAX,
                irreducibility: usize::MAX,
                protocol_spin: usize::MAX,
            });
        }
        match env_value {
            None => Ok(Self {
                spectrum: DEFAULT_SPECTRUM_MAX_N,
                irreducibility: DEFAULT_IRREDUCIBILITY_MAX_N,
                protocol_spin: DEFAULT_PROTOCOL_SPIN_MAX_N,
            }),
            Some(raw) => {
                let n: usize = raw
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("{MAX_N_ENV} must be a non-negative integer, got {raw:?}")))?;
                Ok(Self {
                    spectrum: n,
                    irreducibility: n,
                    protocol_spin: n,
                })
            }
        }
    }
}

fn check_cap(name: &str, n: usize, cap: usize) -> Result<(), CliError> {
    if n > cap {
        return Err(usage(format!(
            "--{name} {n} exceeds the configured maximum {cap} (use --allow-large or {MAX_N_ENV})"
        )));
    }
    Ok(())
}

pub fn execute(cli: &Cli, limits: Limits) -> Result<Output, CliError> {
    match &cli.command {
        Command::Bound(a) => bound(a.n, a.identical),
        Command::Spectrum(a) => spectrum(a.n, a.epsilon, limits),
        Command::Irreducibility(a) => irreducibility(a.n, limits),
        Command::ModelMetrics(a) => model_metrics(a.model, a.size, a.at, a.nodes),
        Command::Protocol(a) => protocol(a.m, a.spin_n, a.phi, a.shots, cli.seed, limits),
        Command::Table2(a) => table2(a),
        Command::Fig1(a) => fig1(a.panel, a.n, a.qubits, a.points),
    }
}

fn bound(n: usize, identical: bool) -> Result<Output, CliError> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let b = outcome_bound(n, identical);
    let formula = match (identical, n % 2) {
        (true, _) => "n+1",
        (false, 0) => "(n+2)^2/4",
        (false, _) => "(n+1)(n+3)/4",
    };
    let mut table = Table::new(&["n", "identical", "bound", "formula"]);
    table.rows.push(vec![json!(n), json!(identical), json!(b), json!(formula)]);
    Ok(Output {
        params: json!({"n": n, "identical": identical}),
        results: json!({"n": n, "bound": b, "formula": formula}),
        tolerances: json!({}),
        table,
    })
}

fn spectrum(n: usize, epsilon: Option<f64>, limits: Limits) -> Result<Output, CliError> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    check_cap("n", n, limits.spectrum)?;
    let eps = epsilon.unwrap_or_else(|| epsilon_for(n));
    if !eps.is_finite() {
        return Err(usage("--epsilon must be finite"));
    }
    let o = collective_observable(n, eps)?;
    let tol = o.default_tolerance();
    let distinct = count_distinct_eigenvalues(&o, tol)? as u64;
    let b = outcome_bound(n, false);
    let saturated = distinct == b;
    let mut table = Table::new(&["n", "epsilon", "tolerance", "distinct", "bound", "saturated"]);
    table
        .rows
        .push(vec![json!(n), json!(eps), json!(tol), json!(distinct), json!(b), json!(saturated)]);
    Ok(Output {
        params: json!({"n": n, "epsilon": eps}),
        results: json!({"dimension": 1u64 << n, "distinct_eigenvalues": distinct, "bound": b, "saturated": saturated}),
        tolerances: json!({"eigenvalue_cluster": tol}),
        table,
    })
}

fn irreducibility(n: usize, limits: Limits) -> Result<Output, CliError> {
    if n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    check_cap("n", n, limits.irreducibility)?;
    let reports = irreducibility_reports(n)?;
    let all = reports.iter().all(|r| r.irreducible);
    let mut table = Table::new(&["n", "j", "m", "dimension", "commutant_dim", "irreducible", "residual"]);
    for r in &reports {
        table.rows.push(vec![
            json!(r.n),
            json!(r.j.to_string()),
            json!(r.m.to_string()),
            json!(r.dimension),
            json!(r.commutant_dim),
            json!(r.irreducible),
            json!(r.residual),
        ]);
    }
    Ok(Output {
        params: json!({"n": n}),
        results: json!({"spaces": reports.len(), "all_irreducible": all, "reports": reports}),
        tolerances: json!({
            "subspace": precision_atlas_core::symmetry::SUBSPACE_TOL,
            "nullspace_relative": precision_atlas_core::symmetry::NULLSPACE_REL_TOL,
        }),
        table,
    })
}

fn build_model(name: ModelName, size: Option<u64>) -> Result<(EstimationModel, Option<AsymptoticKind>), CliError> {
    let need = |what: &str| size.ok_or_else(|| usage(format!("--size ({what}) is required for this model")));
    Ok(match name {
        ModelName::SingleShot => (single_shot_mz(), None),
        ModelName::Binomial => {
            let n = need("repetitions")?;
            (binomial_model(n)?, Some(AsymptoticKind::Sql { n }))
        }
        ModelName::Qpea => {
            let q = u32::try_from(need("qubits")?).map_err(|_| usage("--size is too large"))?;
            (qpea_model(q)?, Some(AsymptoticKind::Qpea { qubits: q }))
        }
        ModelName::Deterministic => {
            let m = usize::try_from(need("outcomes")?).map_err(|_| usage("--size is too large"))?;
            (deterministic_model(m)?, None)
        }
        ModelName::QmetrologyBatch => (trinomial_batch_model(need("nu")?)?, None),
    })
}

fn model_metrics(name: ModelName, size: Option<u64>, at: Option<f64>, nodes: usize) -> Result<Output, CliError> {
    if nodes < infometrics::MIN_NODES {
        return Err(usage(format!("--nodes must be at least {}", infometrics::MIN_NODES)));
    }
    let (model, kind) = build_model(name, size)?;
    let m = model.m() as f64;
    let at = at.unwrap_or(if model.is_angular() { PI - PI / m } else { 0.0 });
    if !model.range().contains(at) {
        return Err(usage(format!("--at {at} lies outside the model's parameter range")));
    }
    let asymptotic = kind.map(asymptotics).transpose()?;
    let report = metric_report(&model, nodes, at, asymptotic)?;
    let large_n = precision_large_n(&model).ok();
    let mut table = Table::new(&["model", "m", "delta", "rmse", "rmse_at", "mutual_info", "exp_neg_i", "quadrature_error"]);
    table.rows.push(vec![
        json!(report.label),
        json!(report.m_outcomes),
        json!(report.delta),
        json!(report.rmse),
        json!(report.rmse_at),
        json!(report.mutual_info),
        json!(report.exp_neg_i),
        json!(report.quadrature_error_estimate),
    ]);
    Ok(Output {
        params: json!({"model": model.label(), "size": size, "at": at, "nodes": nodes}),
        results: json!({"report": report, "delta_large_n": large_n}),
        tolerances: json!({"quadrature_error_estimate": report.quadrature_error_estimate}),
        table,
    })
}

fn protocol(
    m: Option<usize>,
    spin_n: Option<usize>,
    phi: f64,
    shots: Option<u64>,
    seed: Option<u64>,
    limits: Limits,
) -> Result<Output, CliError> {
    if !(0.0..TAU).contains(&phi) {
        return Err(usage(format!("--phi must lie in [0, 2π), got {phi}")));
    }
    let (observable, source) = match (m, spin_n) {
        (Some(m), None) => {
            if !(2..=MAX_PROTOCOL_M).contains(&m) {
                return Err(usage(format!("--m must lie in 2..={MAX_PROTOCOL_M}")));
            }
            let values: Vec<f64> = (0..m).map(|k| k as f64).collect();
            (HermitianObservable::diagonal(&values), json!({"m": m}))
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(usage("--spin-n must be at least 1"));
            }
            check_cap("spin-n", n, limits.protocol_spin)?;
            (collective_observable(n, epsilon_for(n))?, json!({"spin_n": n}))
        }
        _ => return Err(usage("exactly one of --m and --spin-n is required")),
    };
    let spec = build_canonical(&observable)?;
    let result = run(&spec, phi)?;
    let (abs, rel) = protocol_precision(&spec);
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let histogram = match shots {
        Some(0) => return Err(usage("--shots must be at least 1")),
        Some(s) => Some(sample(&spec, phi, seed, s)?),
        None => None,
    };
    let mp = spec.m();
    let mut header = vec!["r", "estimate", "probability"];
    if histogram.is_some() {
        header.push("count");
    }
    let mut table = Table::new(&header);
    for (r, p) in result.outcome_probs.iter().enumerate() {
        let mut row = vec![json!(r), json!(TAU * r as f64 / mp as f64), json!(p)];
        if let Some(h) = &histogram {
            row.push(json!(h[r]));
        }
        table.rows.push(row);
    }
    let mut params = json!({"phi": phi, "shots": shots, "seed": shots.map(|_| seed)});
    if let (Value::Object(p), Value::Object(s)) = (&mut params, source) {
        p.extend(s);
    }
    Ok(Output {
        params,
        results: json!({
            "m": mp,
            "run": result,
            "precision_absolute": abs,
            "precision_relative": rel,
            "histogram": histogram,
        }),
        tolerances: json!({"basis_orthonormality": precision_atlas_core::protocol::BASIS_TOL}),
        table,
    })
}

fn table2(a: &crate::args::Table2Args) -> Result<Output, CliError> {
    if a.nodes < infometrics::MIN_NODES {
        return Err(usage(format!("--nodes must be at least {}", infometrics::MIN_NODES)));
    }
    let req = Table2Request {
        qpea_qubits: a.qpea_qubits,
        sql_n: a.sql_n,
        nu: a.nu,
        qm_n: a.qm_n,
        nodes: a.nodes,
        base: match a.log_base {
            BaseArg::Natural => LogBase::Natural,
            BaseArg::Decimal => LogBase::Decimal,
        },
    };
    let rows = infometrics::table2(&req)?;
    let mut table = Table::new(&[
        "strategy", "metric", "closed_form", "numeric", "deviation", "tolerance", "within_tolerance",
    ]);
    for r in &rows {
        for (metric, c) in [("rmse", &r.rmse), ("delta", &r.delta), ("mutual_info", &r.mutual_info), ("exp_neg_i", &r.exp_neg_i)] {
            table.rows.push(vec![
                json!(r.strategy),
                json!(metric),
                json!(c.closed_form),
                json!(c.numeric),
                json!(c.deviation),
                json!(c.tolerance),
                json!(c.within_tolerance),
            ]);
        }
    }
    Ok(Output {
        params: serde_json::to_value(req).map_err(|e| CliError::Io(e.to_string()))?,
        results: json!({"rows": rows, "all_within_tolerance": rows.iter().all(|r| r.within_tolerance())}),
        tolerances: json!({
            "sql_mutual_info": infometrics::SQL_MI_TOL,
            "qpea_mutual_info": infometrics::QPEA_MI_TOL,
            "qpea_rmse_scaled": infometrics::QPEA_RMSE_SCALED_TOL,
            "qmetrology_batch_mutual_info": infometrics::QMETROLOGY_BATCH_MI_TOL,
            "qmetrology_rmse": infometrics::QMETROLOGY_RMSE_TOL,
        }),
        table,
    })
}

fn fig1(panel: Panel, n: u64, qubits: u32, points: usize) -> Result<Output, CliError> {
    if !(2..=MAX_FIG1_POINTS).contains(&points) {
        return Err(usage(format!("--points must lie in 2..={MAX_FIG1_POINTS}")));
    }
    let phis: Vec<f64> = (0..points).map(|i| TAU * i as f64 / points as f64).collect();
    let (model, to_param): (EstimationModel, fn(f64) -> f64) = match panel {
        Panel::A => (single_shot_mz(), |phi| phi),
        Panel::B => (binomial_model(n)?, f64::cos),
        Panel::C => (qpea_model(qubits)?, |phi| phi),
    };
    let names: Vec<String> = match panel {
        Panel::A => vec!["P_minus".into(), "P_plus".into()],
        _ => (0..model.m()).map(|r| format!("P_{r}")).collect(),
    };
    let mut header = vec!["phi"];
    header.extend(names.iter().map(String::as_str));
    let mut table = Table::new(&header);
    let mut series: Vec<Vec<f64>> = vec![Vec::with_capacity(points); model.m()];
    for &phi in &phis {
        let probs = model.likelihoods(to_param(phi));
        let mut row = vec![json!(phi)];
        for (s, p) in series.iter_mut().zip(&probs) {
            s.push(*p);
            row.push(json!(p));
        }
        table.rows.push(row);
    }
    let label = match panel {
        Panel::A => "a",
        Panel::B => "b",
        Panel::C => "c",
    };
    let curves: Vec<Value> = names
        .iter()
        .zip(model.outcomes())
        .zip(&series)
        .map(|((name, z), s)| json!({"name": name, "estimate": z, "values": s}))
        .collect();
    Ok(Output {
        params: json!({"panel": label, "model": model.label(), "points": points}),
        results: json!({"phi": phis, "series": curves}),
        tolerances: json!({}),
        table,
    })
}
