//! Precision, RMSE and mutual information of estimation models, next to the
//! leading-order closed forms they are compared with.
//!
//! Mutual information is always in nats and assumes a uniform prior over the
//! model's parameter range.

use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::{
    check_normalized, invert_binomial, binomial_halfwidth_large_n, qmetrology_model, EstimationModel, InversionRule,
    LogBase, DEFAULT_GRID_POINTS,
};
use crate::quadrature::{panel_edges, GaussLegendre};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Minimum Gauss–Legendre nodes per panel.
pub const MIN_NODES: usize = 32;
/// Nodes per panel used when the caller has no preference.
pub const DEFAULT_NODES: usize = 64;

const NORMALIZATION_TOL: f64 = 1e-10;

fn xlnx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// `I = H(z) − H(z|x)` by composite Gauss–Legendre over the model's panels.
fn mutual_information_raw(model: &EstimationModel, nodes: usize) -> f64 {
    let range = model.range();
    let rule = GaussLegendre::new(nodes);
    let edges = panel_edges(range.lo, range.hi, model.breakpoints());
    let m = model.m();
    let mut probs = vec![0.0; m];
    let mut marginal = vec![0.0; m];
    let mut neg_conditional = 0.0;
    for w in edges.windows(2) {
        for (x, weight) in rule.points(w[0], w[1]) {
            model.likelihoods_into(x, &mut probs);
            let mut acc = 0.0;
            for (p, mg) in probs.iter().zip(marginal.iter_mut()) {
                acc += xlnx(*p);
                *mg += weight * p;
            }
            neg_conditional += weight * acc;
        }
    }
    let len = range.length();
    let entropy: f64 = -marginal.iter().map(|&p| xlnx(p / len)).sum::<f64>();
    entropy + neg_conditional / len
}

/// Mutual information between a uniformly distributed parameter and the
/// model's estimate, `nodes` quadrature points per panel.
pub fn mutual_information(model: &EstimationModel, nodes: usize) -> Result<f64> {
    mutual_information_with_error(model, nodes).map(|(i, _)| i)
}

/// Mutual information and a quadrature error estimate (difference against
/// the rule with half as many nodes).
pub fn mutual_information_with_error(model: &EstimationModel, nodes: usize) -> Result<(f64, f64)> {
    if nodes < MIN_NODES {
        return Err(invalid("nodes", format!("need at least {MIN_NODES} nodes per panel, got {nodes}")));
    }
    check_normalized(model, DEFAULT_GRID_POINTS, NORMALIZATION_TOL)?;
    let fine = mutual_information_raw(model, nodes);
    let coarse = mutual_information_raw(model, nodes.div_ceil(2));
    Ok((fine, (fine - coarse).abs()))
}

/// Root-mean-square error of the estimate about `x_true`; angular models
/// use the wrapped distance.
pub fn rmse(model: &EstimationModel, x_true: f64) -> f64 {
    let range = model.range();
    model
        .likelihoods(x_true)
        .iter()
        .zip(model.outcomes())
        .map(|(p, &z)| {
            let d = range.distance(z, x_true);
            p * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// RMSE with the chord metric `sin²(½(φ − z_r))` for angular models.
pub fn chord_rmse(model: &EstimationModel, phi: f64) -> Result<f64> {
    if !model.is_angular() {
        return Err(Error::NotAngular(model.label().to_string()));
    }
    Ok(model
        .likelihoods(phi)
        .iter()
        .zip(model.outcomes())
        .map(|(p, &z)| {
            let s = ((phi - z) / 2.0).sin();
            p * s * s
        })
        .sum::<f64>()
        .sqrt())
}

/// Per-outcome half-widths `δ_r`, in scaled units (range mapped to `[−1, 1]`).
pub fn inversion_halfwidths(model: &EstimationModel) -> Result<Vec<f64>> {
    match model.inversion() {
        InversionRule::Binomial { trials } => model
            .outcomes()
            .iter()
            .map(|&z| invert_binomial(z, trials).map(|i| i.halfwidth))
            .collect(),
        InversionRule::Grid => {
            let len = model.range().length();
            let spacing = match model.outcomes() {
                [a, b, ..] => b - a,
                _ => len,
            };
            // half of a cell, rescaled from a range of `len` to one of 2
            Ok(vec![spacing / len; model.m()])
        }
        InversionRule::None => Err(Error::NoInversionRule(model.label().to_string())),
    }
}

/// Precision `δ = max_r δ_r`.
pub fn precision(model: &EstimationModel) -> Result<f64> {
    Ok(inversion_halfwidths(model)?.into_iter().fold(0.0, f64::max))
}

/// `max_r √(1 − z_r²)/√n` for binomially inverted models.
pub fn precision_large_n(model: &EstimationModel) -> Result<f64> {
    match model.inversion() {
        InversionRule::Binomial { trials } => Ok(model
            .outcomes()
            .iter()
            .map(|&z| binomial_halfwidth_large_n(z, trials))
            .fold(0.0, f64::max)),
        _ => Err(Error::NoInversionRule(model.label().to_string())),
    }
}

/// The three estimation strategies compared in the closed-form table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AsymptoticKind {
    /// `n` uncorrelated repetitions.
    Sql { n: u64 },
    /// Phase estimation on `qubits` qubits.
    Qpea { qubits: u32 },
    /// Decimal-digit batches; `n = 10^d`.
    QMetrology { n: u64, nu: u64, base: LogBase },
}

/// Leading-order closed forms for one strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub kind: AsymptoticKind,
    pub m: f64,
    pub rmse: f64,
    pub delta: f64,
    pub mutual_info: f64,
    pub exp_neg_i: f64,
}

/// `½ ln N − ½ ln(2πe)`.
pub fn sql_mutual_info_closed_form(n: f64) -> f64 {
    0.5 * n.ln() - 0.5 * (2.0 * PI * E).ln()
}

/// `ln M − 2(1 − γ)`.
pub fn qpea_mutual_info_closed_form(m: f64) -> f64 {
    m.ln() - 2.0 * (1.0 - EULER_GAMMA)
}

/// `√(8 ln 2 / M)`.
pub fn qpea_rmse_closed_form(m: f64) -> f64 {
    (8.0 * LN_2 / m).sqrt()
}

/// `d · ½ ln ν`.
pub fn qmetrology_mutual_info_closed_form(digits: u32, nu: u64) -> f64 {
    f64::from(digits) * 0.5 * (nu as f64).ln()
}

/// `1/(10√ν)`.
pub fn qmetrology_rmse_closed_form(nu: u64) -> f64 {
    1.0 / (10.0 * (nu as f64).sqrt())
}

pub fn asymptotics(kind: AsymptoticKind) -> Result<AsymptoticRow> {
    let row = match kind {
        AsymptoticKind::Sql { n } => {
            if n == 0 {
                return Err(invalid("n", "need at least one repetition"));
            }
            let m = n as f64 + 1.0;
            let mutual_info = 0.5 * (m / (2.0 * PI * E)).ln();
            AsymptoticRow {
                kind,
                m,
                rmse: 1.0 / m.sqrt(),
                delta: 1.0 / m.sqrt(),
                mutual_info,
                exp_neg_i: (-mutual_info).exp(),
            }
        }
        AsymptoticKind::Qpea { qubits } => {
            if qubits == 0 || qubits > 62 {
                return Err(invalid("qubits", format!("unsupported qubit count {qubits}")));
            }
            let m = (1u64 << qubits) as f64;
            let mutual_info = qpea_mutual_info_closed_form(m);
            AsymptoticRow {
                kind,
                m,
                rmse: qpea_rmse_closed_form(m),
                delta: 1.0 / m,
                mutual_info,
                exp_neg_i: (-mutual_info).exp(),
            }
        }
        AsymptoticKind::QMetrology { n, nu, base } => {
            let model = qmetrology_model(n, nu)?;
            let m = model.outcome_count(base);
            let mutual_info = qmetrology_mutual_info_closed_form(model.digits, nu);
            AsymptoticRow {
                kind,
                m,
                rmse: qmetrology_rmse_closed_form(nu),
                delta: 1.0 / m.sqrt(),
                mutual_info,
                exp_neg_i: (-mutual_info).exp(),
            }
        }
    };
    Ok(row)
}

/// `σ² = (8π²/M⁴) Σ_s s² csc²(πs/M)` over half-integers `s = ½, 3/2, …, (M−1)/2`:
/// the QPEA RMSE at `φ = π − π/M` written as a sum over distances from the peak.
pub fn qpea_rmse_peak_sum(m: usize) -> Result<f64> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(invalid("m", format!("the peak-centred sum needs an even M, got {m}")));
    }
    let mf = m as f64;
    let sum: f64 = (0..m / 2)
        .map(|k| {
            let s = k as f64 + 0.5;
            let c = 1.0 / (PI * s / mf).sin();
            s * s * c * c
        })
        .sum();
    Ok((8.0 * PI * PI / mf.powi(4) * sum).sqrt())
}

/// Sum of per-batch mutual informations of the Q-Metrology composite.
pub fn qmetrology_mutual_info(n: u64, nu: u64, nodes: usize) -> Result<f64> {
    let model = qmetrology_model(n, nu)?;
    model.batches.iter().map(|b| mutual_information(b, nodes)).sum()
}

/// Numerical metrics of one model.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub label: String,
    pub m_outcomes: usize,
    /// Precision in scaled units.
    pub delta: f64,
    pub rmse: f64,
    /// Parameter value at which `rmse` was evaluated.
    pub rmse_at: f64,
    /// Nats.
    pub mutual_info: f64,
    pub exp_neg_i: f64,
    pub asymptotic: Option<AsymptoticRow>,
    pub quadrature_error_estimate: f64,
}

pub fn metric_report(
    model: &EstimationModel,
    nodes: usize,
    rmse_at: f64,
    asymptotic: Option<AsymptoticRow>,
) -> Result<MetricReport> {
    let (mutual_info, quadrature_error_estimate) = mutual_information_with_error(model, nodes)?;
    Ok(MetricReport {
        label: model.label().to_string(),
        m_outcomes: model.m(),
        delta: precision(model)?,
        rmse: rmse(model, rmse_at),
        rmse_at,
        mutual_info,
        exp_neg_i: (-mutual_info).exp(),
        asymptotic,
        quadrature_error_estimate,
    })
}

/// Allowed `|I_num − (ln M − 2(1−γ))|` for the QPEA row.
pub const QPEA_MI_TOL: f64 = 0.01;
/// Allowed `|σ√M − √(8 ln 2)|` for the QPEA row.
pub const QPEA_RMSE_SCALED_TOL: f64 = 0.05;
/// Allowed `|I_num − ½ ln(M/2πe)|` for the SQL row.
pub const SQL_MI_TOL: f64 = 0.05;
/// Allowed per-batch `|I_num − ½ ln ν|` for the Q-Metrology row.
pub const QMETROLOGY_BATCH_MI_TOL: f64 = 0.1;
/// Allowed deviation of the aggregated Q-Metrology RMSE from `1/(10√ν)`.
pub const QMETROLOGY_RMSE_TOL: f64 = 1e-12;

/// Closed form next to a numerical value of the same quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub closed_form: f64,
    /// `None` when no independent numerical value exists.
    pub numeric: Option<f64>,
    pub deviation: Option<f64>,
    pub tolerance: Option<f64>,
    pub within_tolerance: Option<bool>,
}

impl Comparison {
    fn new(closed_form: f64, numeric: Option<f64>, tolerance: Option<f64>) -> Self {
        let deviation = numeric.map(|v| (v - closed_form).abs());
        let within_tolerance = match (deviation, tolerance) {
            (Some(d), Some(t)) => Some(d <= t),
            _ => None,
        };
        Self {
            closed_form,
            numeric,
            deviation,
            tolerance,
            within_tolerance,
        }
    }
}

/// Parameters of the three-strategy comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table2Request {
    pub qpea_qubits: u32,
    pub sql_n: u64,
    pub nu: u64,
    /// Q-Metrology register size, a power of ten.
    pub qm_n: u64,
    pub nodes: usize,
    pub base: LogBase,
}

impl Default for Table2Request {
    fn default() -> Self {
        Self {
            qpea_qubits: 8,
            sql_n: 1024,
            nu: 100,
            qm_n: 10,
            nodes: DEFAULT_NODES,
            base: LogBase::Natural,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub strategy: String,
    pub m: f64,
    pub rmse: Comparison,
    /// Parameter value at which the numerical RMSE is evaluated.
    pub rmse_at: Option<f64>,
    pub delta: Comparison,
    pub mutual_info: Comparison,
    pub exp_neg_i: Comparison,
    pub quadrature_error_estimate: f64,
}

impl Table2Row {
    /// `false` if any toleranced column is out of tolerance.
    pub fn within_tolerance(&self) -> bool {
        [&self.rmse, &self.delta, &self.mutual_info, &self.exp_neg_i]
            .iter()
            .all(|c| c.within_tolerance != Some(false))
    }
}

/// SQL, QPEA and Q-Metrology rows: closed forms against numerics.
pub fn table2(req: &Table2Request) -> Result<Vec<Table2Row>> {
    let nodes = req.nodes;

    let sql = asymptotics(AsymptoticKind::Sql { n: req.sql_n })?;
    let sql_model = crate::models::binomial_model(req.sql_n)?;
    let (sql_i, sql_err) = mutual_information_with_error(&sql_model, nodes)?;
    let sql_row = Table2Row {
        strategy: "sql".into(),
        m: sql.m,
        rmse: Comparison::new(sql.rmse, Some(rmse(&sql_model, 0.0)), None),
        rmse_at: Some(0.0),
        delta: Comparison::new(sql.delta, Some(precision(&sql_model)?), None),
        mutual_info: Comparison::new(sql.mutual_info, Some(sql_i), Some(SQL_MI_TOL)),
        exp_neg_i: Comparison::new(sql.exp_neg_i, Some((-sql_i).exp()), None),
        quadrature_error_estimate: sql_err,
    };

    let qpea = asymptotics(AsymptoticKind::Qpea { qubits: req.qpea_qubits })?;
    let qpea_model = crate::models::qpea_model(req.qpea_qubits)?;
    let (qpea_i, qpea_err) = mutual_information_with_error(&qpea_model, nodes)?;
    let phi = PI - PI / qpea.m;
    let qpea_row = Table2Row {
        strategy: "qpea".into(),
        m: qpea.m,
        rmse: Comparison::new(
            qpea.rmse,
            Some(rmse(&qpea_model, phi)),
            Some(QPEA_RMSE_SCALED_TOL / qpea.m.sqrt()),
        ),
        rmse_at: Some(phi),
        delta: Comparison::new(qpea.delta, Some(precision(&qpea_model)?), None),
        mutual_info: Comparison::new(qpea.mutual_info, Some(qpea_i), Some(QPEA_MI_TOL)),
        exp_neg_i: Comparison::new(qpea.exp_neg_i, Some((-qpea_i).exp()), None),
        quadrature_error_estimate: qpea_err,
    };

    let qm = asymptotics(AsymptoticKind::QMetrology { n: req.qm_n, nu: req.nu, base: req.base })?;
    let qm_model = qmetrology_model(req.qm_n, req.nu)?;
    let mut qm_i = 0.0;
    let mut qm_err = 0.0;
    for batch in &qm_model.batches {
        let (i, e) = mutual_information_with_error(batch, nodes)?;
        qm_i += i;
        qm_err += e;
    }
    let digits = f64::from(qm_model.digits);
    let qm_row = Table2Row {
        strategy: "qmetrology".into(),
        m: qm.m,
        rmse: Comparison::new(qm.rmse, Some(qm_model.rmse()), Some(QMETROLOGY_RMSE_TOL)),
        rmse_at: None,
        delta: Comparison::new(qm.delta, None, None),
        mutual_info: Comparison::new(qm.mutual_info, Some(qm_i), Some(digits * QMETROLOGY_BATCH_MI_TOL)),
        exp_neg_i: Comparison::new(qm.exp_neg_i, Some((-qm_i).exp()), None),
        quadrature_error_estimate: qm_err,
    };

    Ok(vec![sql_row, qpea_row, qm_row])
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::models::{binomial_model, deterministic_model, qpea_model, single_shot_mz, trinomial_batch_model};
    use proptest::prelude::*;

    fn models(n: u64, qubits: u32, m: usize, nu: u64) -> Vec<EstimationModel> {
        vec![
            single_shot_mz(),
            binomial_model(n).unwrap(),
            qpea_model(qubits).unwrap(),
            deterministic_model(m).unwrap(),
            trinomial_batch_model(nu).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn information_is_bounded_by_log_outcomes(n in 1u64..300, qubits in 1u32..8, m in 1usize..40, nu in 1u64..60) {
            for model in models(n, qubits, m, nu) {
                let (mi, err) = mutual_information_with_error(&model, DEFAULT_NODES).unwrap();
                let ln_m = (model.m() as f64).ln();
                prop_assert!(mi <= ln_m + err + 1e-12, "{}: {mi} > {ln_m}", model.label());
                prop_assert!((-mi).exp() >= 1.0 / model.m() as f64 - err - 1e-12);
            }
        }

        #[test]
        fn precision_is_at_least_one_over_m(n in 1u64..5000, qubits in 1u32..16, m in 1usize..500) {
            for model in [binomial_model(n).unwrap(), qpea_model(qubits).unwrap(), deterministic_model(m).unwrap()] {
                prop_assert!(precision(&model).unwrap() >= 1.0 / model.m() as f64 - 1e-12, "{}", model.label());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn quadrature_converges_for_binomial(n in 1u64..1025) {
            let model = binomial_model(n).unwrap();
            let coarse = mutual_information(&model, DEFAULT_NODES).unwrap();
            let fine = mutual_information(&model, 2 * DEFAULT_NODES).unwrap();
            prop_assert!((coarse - fine).abs() < 1e-6, "n={n}: {}", (coarse - fine).abs());
        }
    }
}
