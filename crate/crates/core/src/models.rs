//! Estimation models: a finite list of estimates `z_r` together with
//! likelihoods `P_r(x)` over a parameter range.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default number of grid points used for invariant sweeps.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Below this `|1 − t_r|` the QPEA kernel uses its series about the peak.
pub const QPEA_SINGULAR_TOL: f64 = 1e-9;

pub const MAX_QPEA_QUBITS: u32 = 20;
/// Below this `|sin(Δ_r/2)|` the QPEA likelihood is evaluated per outcome.
const QPEA_FAST_PATH_MIN_SIN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeKind {
    /// `x ∈ [−1, 1]`
    Scaled,
    /// `φ ∈ [0, 2π)`
    Angular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub kind: RangeKind,
}

impl ParamRange {
    pub const SCALED: Self = Self {
        lo: -1.0,
        hi: 1.0,
        kind: RangeKind::Scaled,
    };
    pub const ANGULAR: Self = Self {
        lo: 0.0,
        hi: TAU,
        kind: RangeKind::Angular,
    };

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        match self.kind {
            RangeKind::Scaled => (self.lo..=self.hi).contains(&x),
            RangeKind::Angular => (self.lo..=self.hi).contains(&x),
        }
    }

    /// `points` uniformly spaced values covering the range (endpoint
    /// excluded for angular ranges).
    pub fn grid(&self, points: usize) -> Vec<f64> {
        match (self.kind, points) {
            (_, 0) => Vec::new(),
            (_, 1) => vec![self.lo],
            (RangeKind::Scaled, p) => (0..p).map(|i| self.lo + self.length() * i as f64 / (p - 1) as f64).collect(),
            (RangeKind::Angular, p) => (0..p).map(|i| self.lo + self.length() * i as f64 / p as f64).collect(),
        }
    }

    /// Distance between two parameter values, wrapped for angles.
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.kind {
            RangeKind::Scaled => d,
            RangeKind::Angular => {
                let d = d.rem_euclid(TAU);
                d.min(TAU - d)
            }
        }
    }
}

/// How a model's outcomes are inverted into an interval for the true value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum InversionRule {
    /// `|x − z_r| ≤ √((1 − x²)/trials)` solved exactly for `x`.
    Binomial { trials: u64 },
    /// Equispaced outcomes, each owning a cell of the outcome grid.
    Grid,
    None,
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    SingleShot,
    Binomial { n: u64, ln_choose: Vec<f64> },
    /// `half_angles[r] = (sin(πr/M), cos(πr/M))`.
    Qpea { m: usize, half_angles: Vec<(f64, f64)> },
    Deterministic { m: usize },
    /// `ν` trials of a `{−1, 0, +1}` observable with the middle outcome never populated.
    TrinomialBatch { nu: u64, ln_choose: Vec<f64> },
}

/// A finite-outcome estimation model with likelihoods `P_r(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationModel {
    label: String,
    outcomes: Vec<f64>,
    range: ParamRange,
    inversion: InversionRule,
    family: Family,
}

fn ln_choose_table(n: u64) -> Vec<f64> {
    let mut table = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += ((n - k + 1) as f64).ln() - (k as f64).ln();
        table.push(acc);
    }
    table
}

/// `C(n,k) p^k q^(n−k)`, written into `out[k]` for every `k`.
fn binomial_row(ln_choose: &[f64], p: f64, out: &mut [f64]) {
    let n = ln_choose.len() - 1;
    let q = 1.0 - p;
    if p <= 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] = 1.0;
        return;
    }
    if q <= 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[n] = 1.0;
        return;
    }
    let (lp, lq) = (p.ln(), q.ln());
    for (k, v) in out.iter_mut().enumerate() {
        *v = (ln_choose[k] + k as f64 * lp + (n - k) as f64 * lq).exp();
    }
}

/// QPEA kernel `P_r(φ) = |Σ_j t_r^j|² / M²` with `t_r = e^{i(φ − 2πr/M)}`.
pub fn qpea_kernel(m: usize, r: usize, phi: f64) -> f64 {
    let mf = m as f64;
    let delta = phi - TAU * r as f64 / mf;
    let s = (delta / 2.0).sin();
    if 2.0 * s.abs() < QPEA_SINGULAR_TOL {
        // second-order expansion about the removable singularity
        let reduced = (delta / 2.0).sin().asin() * 2.0;
        return 1.0 - (mf * mf - 1.0) * reduced * reduced / 12.0;
    }
    let num = (mf * delta / 2.0).sin();
    (num * num) / (mf * mf * s * s)
}

/// Likelihood of the appendix's index `r` (number of `−1` results) in `n` trials.
pub fn binomial_appendix_pmf(n: u64, r: u64, x: f64) -> f64 {
    if r > n {
        return 0.0;
    }
    let table = ln_choose_table(n);
    let mut row = vec![0.0; n as usize + 1];
    binomial_row(&table, (1.0 + x) / 2.0, &mut row);
    row[(n - r) as usize]
}

impl EstimationModel {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn m(&self) -> usize {
        self.outcomes.len()
    }

    pub fn range(&self) -> ParamRange {
        self.range
    }

    pub fn inversion(&self) -> InversionRule {
        self.inversion
    }

    pub fn is_angular(&self) -> bool {
        self.range.kind == RangeKind::Angular
    }

    /// QPEA register size `M` if this is a QPEA model.
    pub fn qpea_size(&self) -> Option<usize> {
        match self.family {
            Family::Qpea { m, .. } => Some(m),
            _ => None,
        }
    }

    /// Writes `P_r(x)` for every outcome into `out` (length `m()`).
    pub fn likelihoods_into(&self, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.m());
        match &self.family {
            Family::SingleShot => {
                let h = x / 2.0;
                out[0] = h.sin() * h.sin();
                out[1] = h.cos() * h.cos();
            }
            Family::Binomial { ln_choose, .. } => binomial_row(ln_choose, ((1.0 + x) / 2.0).clamp(0.0, 1.0), out),
            Family::Qpea { m, half_angles } => {
                // sin²(MΔ_r/2) does not depend on r; its absolute rounding error
                // grows with Mx, so outcomes near the peak use the kernel directly
                let mf = *m as f64;
                let num = (mf * x / 2.0).sin().powi(2) / (mf * mf);
                let (sa, ca) = (x / 2.0).sin_cos();
                for (r, (v, &(sb, cb))) in out.iter_mut().zip(half_angles).enumerate() {
                    let s = sa * cb - ca * sb;
                    *v = if s.abs() < QPEA_FAST_PATH_MIN_SIN {
                        qpea_kernel(*m, r, x)
                    } else {
                        num / (s * s)
                    };
                }
            }
            Family::Deterministic { m } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let cell = (((x - self.range.lo) / self.range.length()) * *m as f64).floor();
                out[(cell.max(0.0) as usize).min(m - 1)] = 1.0;
            }
            Family::TrinomialBatch { nu, ln_choose } => {
                let nu = *nu as usize;
                let mut row = vec![0.0; nu + 1];
                binomial_row(ln_choose, ((1.0 + x) / 2.0).clamp(0.0, 1.0), &mut row);
                out.iter_mut().for_each(|v| *v = 0.0);
                // outcome index k ↔ sum 2·plus − ν, i.e. k = 2·plus
                for (plus, p) in row.into_iter().enumerate() {
                    out[2 * plus] = p;
                }
            }
        }
    }

    pub fn likelihoods(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        self.likelihoods_into(x, &mut out);
        out
    }

    pub fn likelihood(&self, r: usize, x: f64) -> f64 {
        match &self.family {
            Family::Qpea { m, .. } => qpea_kernel(*m, r, x),
            _ => self.likelihoods(x)[r],
        }
    }

    /// Expected estimate `Σ_r z_r P_r(x)`.
    pub fn expected_outcome(&self, x: f64) -> f64 {
        self.likelihoods(x).iter().zip(&self.outcomes).map(|(p, z)| p * z).sum()
    }

    /// Points where the likelihoods peak or change character; quadrature
    /// panels are split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::SingleShot => vec![PI],
            Family::Binomial { .. } | Family::TrinomialBatch { .. } => self.outcomes.clone(),
            Family::Qpea { m, .. } => {
                let step = TAU / *m as f64;
                (0..2 * m).map(|k| k as f64 * step / 2.0).collect()
            }
            Family::Deterministic { m } => (1..*m).map(|k| self.range.lo + self.range.length() * k as f64 / *m as f64).collect(),
        }
    }

    /// Largest `|Σ_r P_r(x) − 1|` over `points` grid values.
    pub fn normalization_deviation(&self, points: usize) -> f64 {
        let mut buf = vec![0.0; self.m()];
        self.range
            .grid(points)
            .into_iter()
            .map(|x| {
                self.likelihoods_into(x, &mut buf);
                (buf.iter().sum::<f64>() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Single photon through a Mach–Zehnder interferometer, difference count measured.
pub fn single_shot_mz() -> EstimationModel {
    EstimationModel {
        label: "single-shot".into(),
        outcomes: vec![-1.0, 1.0],
        range: ParamRange::ANGULAR,
        inversion: InversionRule::Binomial { trials: 1 },
        family: Family::SingleShot,
    }
}

/// `n` uncorrelated repetitions; the estimate is the mean difference count.
///
/// Outcomes are `z_i = −1 + 2i/n` with `i` the number of `+1` results, so
/// `P_i(x) = C(n,i) ((1+x)/2)^i ((1−x)/2)^(n−i)` and `E[z] = x`.
pub fn binomial_model(n: u64) -> Result<EstimationModel> {
    if n == 0 {
        return Err(invalid("n", "at least one repetition is required"));
    }
    Ok(EstimationModel {
        label: format!("binomial(n={n})"),
        outcomes: (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect(),
        range: ParamRange::SCALED,
        inversion: InversionRule::Binomial { trials: n },
        family: Family::Binomial {
            n,
            ln_choose: ln_choose_table(n),
        },
    })
}

/// Phase estimation on `n_qubits` qubits: `M = 2^n_qubits` outcomes `2πr/M`.
pub fn qpea_model(n_qubits: u32) -> Result<EstimationModel> {
    if n_qubits == 0 || n_qubits > MAX_QPEA_QUBITS {
        return Err(invalid("n_qubits", format!("must be in 1..={MAX_QPEA_QUBITS}, got {n_qubits}")));
    }
    qpea_model_with_outcomes(1usize << n_qubits)
}

/// QPEA kernel model for an arbitrary outcome count `m ≥ 2`.
pub fn qpea_model_with_outcomes(m: usize) -> Result<EstimationModel> {
    if m < 2 {
        return Err(invalid("m", format!("need at least two outcomes, got {m}")));
    }
    Ok(EstimationModel {
        label: format!("qpea(M={m})"),
        outcomes: (0..m).map(|r| TAU * r as f64 / m as f64).collect(),
        range: ParamRange::ANGULAR,
        inversion: InversionRule::Grid,
        family: Family::Qpea {
            m,
            half_angles: (0..m).map(|r| (PI * r as f64 / m as f64).sin_cos()).collect(),
        },
    })
}

/// The biased estimator that always returns the centre of the cell holding `x`.
pub fn deterministic_model(m: usize) -> Result<EstimationModel> {
    if m == 0 {
        return Err(invalid("m", "need at least one outcome"));
    }
    Ok(EstimationModel {
        label: format!("deterministic(M={m})"),
        outcomes: (0..m).map(|r| -1.0 + (2 * r + 1) as f64 / m as f64).collect(),
        range: ParamRange::SCALED,
        inversion: InversionRule::Grid,
        family: Family::Deterministic { m },
    })
}

/// One Q-Metrology batch: `ν` trials of the three-eigenvalue observable,
/// estimate = mean eigenvalue, parameter `x = cos(Nφ)`.
pub fn trinomial_batch_model(nu: u64) -> Result<EstimationModel> {
    if nu == 0 {
        return Err(invalid("nu", "at least one repetition is required"));
    }
    Ok(EstimationModel {
        label: format!("qmetrology-batch(nu={nu})"),
        outcomes: (0..=2 * nu).map(|k| (k as f64 - nu as f64) / nu as f64).collect(),
        range: ParamRange::SCALED,
        inversion: InversionRule::Binomial { trials: nu },
        family: Family::TrinomialBatch {
            nu,
            ln_choose: ln_choose_table(nu),
        },
    })
}

/// Interval `center ± halfwidth` for `x` given the estimate `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvertedInterval {
    pub center: f64,
    pub halfwidth: f64,
}

impl InvertedInterval {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        (x - self.center).abs() <= self.halfwidth + slack
    }
}

/// Solves `|x − z| ≤ √((1 − x²)/n)` for `x`.
pub fn invert_binomial(z: f64, n: u64) -> Result<InvertedInterval> {
    if n == 0 {
        return Err(invalid("n", "at least one repetition is required"));
    }
    if z.is_nan() || z.abs() > 1.0 {
        return Err(invalid("z", format!("estimate {z} outside [-1, 1]")));
    }
    let nf = n as f64;
    let radicand = 1.0 / (nf + 1.0) - nf * z * z / ((nf + 1.0) * (nf + 1.0));
    if radicand < 0.0 {
        return Err(invalid("z", format!("estimate {z} has no feasible interval")));
    }
    Ok(InvertedInterval {
        center: nf * z / (nf + 1.0),
        halfwidth: radicand.sqrt(),
    })
}

/// Large-`n` half-width `√(1 − z²)/√n`.
pub fn binomial_halfwidth_large_n(z: f64, n: u64) -> f64 {
    ((1.0 - z * z).max(0.0) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    Natural,
    Decimal,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Decimal => x.log10(),
        }
    }
}

/// Q-Metrology as independent decimal-digit batches of `ν` trials each.
#[derive(Debug, Clone)]
pub struct QMetrologyModel {
    pub n: u64,
    pub nu: u64,
    pub digits: u32,
    pub batches: Vec<EstimationModel>,
}

pub fn qmetrology_model(n: u64, nu: u64) -> Result<QMetrologyModel> {
    let digits = decimal_digits(n)?;
    let batch = trinomial_batch_model(nu)?;
    Ok(QMetrologyModel {
        n,
        nu,
        digits,
        batches: vec![batch; digits as usize],
    })
}

/// `d` with `n = 10^d`, `d ≥ 1`.
pub fn decimal_digits(n: u64) -> Result<u32> {
    let mut d = 0;
    let mut v = n;
    while v >= 10 && v.is_multiple_of(10) {
        v /= 10;
        d += 1;
    }
    if v != 1 || d == 0 {
        return Err(invalid("n", format!("{n} is not a positive power of ten")));
    }
    Ok(d)
}

impl QMetrologyModel {
    /// Outcomes of one batch (`2ν + 1`).
    pub fn batch_outcomes(&self) -> u64 {
        2 * self.nu + 1
    }

    /// Exact joint outcome count `(2ν+1)^d`, equal to `n^{log₁₀(2ν+1)}`.
    pub fn aggregate_outcomes(&self) -> f64 {
        (self.batch_outcomes() as f64).powi(self.digits as i32)
    }

    /// Exponent `log(2ν+1)` in `M = n^{log(2ν+1)}` under the chosen log base.
    pub fn outcome_exponent(&self, base: LogBase) -> f64 {
        base.log(self.batch_outcomes() as f64)
    }

    /// `M = n^{log(2ν+1)}` under the chosen log base.
    pub fn outcome_count(&self, base: LogBase) -> f64 {
        (self.n as f64).powf(self.outcome_exponent(base))
    }

    /// `n^{⌊log₁₀(2ν+1)⌋}`: `n²` for `100 ≤ ν < 500`.
    pub fn leading_order_outcome_count(&self) -> f64 {
        (self.n as f64).powi(self.outcome_exponent(LogBase::Decimal).floor() as i32)
    }

    /// Phase multiplier `10^j / 2π` of batch `j` (1-based), which exposes the
    /// `j`-th decimal place of `φ`.
    pub fn phase_multiplier(&self, batch: u32) -> f64 {
        10f64.powi(batch as i32) / TAU
    }

    /// Likelihoods of batch `j` at true phase `φ`.
    pub fn batch_likelihoods_at_phase(&self, batch: u32, phi: f64) -> Result<Vec<f64>> {
        if batch == 0 || batch > self.digits {
            return Err(invalid("batch", format!("batches are numbered 1..={}", self.digits)));
        }
        let x = (self.phase_multiplier(batch) * phi).cos();
        Ok(self.batches[batch as usize - 1].likelihoods(x))
    }

    /// RMSE of the assembled estimate, `√(Σ_i 10^{−2i}/ν)`.
    pub fn rmse(&self) -> f64 {
        let sum: f64 = (1..=self.digits).map(|i| 10f64.powi(-2 * i as i32)).sum();
        (sum / self.nu as f64).sqrt()
    }
}

/// Probes a model for normalization on `points` grid values.
pub fn check_normalized(model: &EstimationModel, points: usize, tol: f64) -> Result<()> {
    let deviation = model.normalization_deviation(points);
    if deviation > tol {
        return Err(Error::NotNormalized {
            label: model.label.clone(),
            deviation,
        });
    }
    Ok(())
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn modal_index(probs: &[f64]) -> usize {
        probs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0)
    }

    proptest! {
        #[test]
        fn likelihoods_are_normalized(n in 1u64..2000, qubits in 1u32..11, nu in 1u64..200, m in 1usize..64, t in 0.0f64..1.0) {
            let models = [
                single_shot_mz(),
                binomial_model(n).unwrap(),
                qpea_model(qubits).unwrap(),
                deterministic_model(m).unwrap(),
                trinomial_batch_model(nu).unwrap(),
            ];
            for model in &models {
                let range = model.range();
                let x = range.lo + t * range.length();
                let probs = model.likelihoods(x);
                prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-10, "{}", model.label());
                prop_assert!(probs.iter().all(|&p| p >= 0.0));
            }
        }

        #[test]
        fn binomial_mean(n in 1u64..1025, x in -1.0f64..=1.0) {
            let model = binomial_model(n).unwrap();
            let probs = model.likelihoods(x);
            let mean_r: f64 = probs.iter().enumerate().map(|(i, p)| (n as usize - i) as f64 * p).sum();
            prop_assert!((mean_r - n as f64 * (1.0 - x) / 2.0).abs() <= 1e-10 * n as f64);
        }

        #[test]
        fn qpea_reflection_symmetry(qubits in 1u32..11) {
            let model = qpea_model(qubits).unwrap();
            let m = model.m();
            let probs = model.likelihoods(PI - PI / m as f64);
            for k in 0..m {
                prop_assert!((probs[m - 1 - k] - probs[k]).abs() <= 1e-12);
            }
        }

        #[test]
        fn modal_inversion_contains_truth(n in 1u64..300, x in -1.0f64..=1.0) {
            let model = binomial_model(n).unwrap();
            let z = model.outcomes()[modal_index(&model.likelihoods(x))];
            prop_assert!(invert_binomial(z, n).unwrap().contains(x, 1e-12));
        }
    }
}
