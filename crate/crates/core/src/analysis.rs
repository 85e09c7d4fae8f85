//! Expected job completion time for every distribution and scaling
//! combination, sweeps over the code rate, and optimal-rate selection.

use std::fmt;

use serde::Serialize;

use crate::birthday::birthday_expectation;
use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::montecarlo::{self, McEstimate};
use crate::order_stats::{
    bimodal_order_mean, bimodal_sum_order_mean, erlang_order_mean, exp_order_mean, pareto_order_mean,
};
use crate::scaling::{validate_shift, ScalingModel, TaskModel};

/// Relative gap under which two expected times count as tied.
pub const TIE_REL: f64 = 1e-12;

/// All divisors of `n` in increasing order.
pub fn divisors(n: u32) -> Vec<u32> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `n` workers, `n` computing units, recovery threshold `k` with `k | n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct JobConfig {
    n: u32,
    k: u32,
}

impl JobConfig {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if k == 0 || k > n {
            return Err(Error::domain(format!("k = {k} outside 1..={n}")));
        }
        if !n.is_multiple_of(k) {
            return Err(Error::invalid(format!("k = {k} does not divide n = {n}")));
        }
        Ok(JobConfig { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Computing units per task.
    pub fn s(&self) -> u32 {
        self.n / self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn strategy(&self) -> Strategy {
        Strategy::new(self.n, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyLabel {
    Replication,
    Splitting,
    Coding,
}

impl fmt::Display for StrategyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Replication => "replication",
            Self::Splitting => "splitting",
            Self::Coding => "coding",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Strategy {
    pub label: StrategyLabel,
    pub rate: f64,
}

impl Strategy {
    /// `k = n` is splitting (including `n = 1`), `k = 1` replication,
    /// anything between coding.
    pub fn new(n: u32, k: u32) -> Self {
        let label = if k == n {
            StrategyLabel::Splitting
        } else if k == 1 {
            StrategyLabel::Replication
        } else {
            StrategyLabel::Coding
        };
        Strategy {
            label,
            rate: k as f64 / n as f64,
        }
    }
}

/// Distribution, scaling model and (where required) the per-unit shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub dist: ServiceDistribution,
    pub scaling: ScalingModel,
    pub shift: Option<f64>,
}

impl Scenario {
    pub fn new(dist: ServiceDistribution, scaling: ScalingModel, shift: Option<f64>) -> Result<Self> {
        validate_shift(&dist, scaling, shift)?;
        Ok(Scenario { dist, scaling, shift })
    }

    pub fn task_model(&self, s: u32) -> Result<TaskModel> {
        TaskModel::new(self.dist, self.scaling, self.shift, s)
    }

    fn cell(&self) -> String {
        format!("{} x {}", self.dist.name(), self.scaling)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.dist, self.scaling)?;
        if let Some(shift) = self.shift {
            write!(f, " shift={shift}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvalMethod {
    Analytic,
    MonteCarlo { trials: u64, seed: u64 },
    Lln,
    /// Analytic where a closed form is available, Monte Carlo otherwise.
    Auto { trials: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Analytic,
    Mc,
    Lln,
}

impl fmt::Display for MethodTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Analytic => "analytic",
            Self::Mc => "mc",
            Self::Lln => "lln",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    pub method: MethodTag,
    pub stderr: Option<f64>,
    /// LLN evaluated exactly at `r = 1 - ε`.
    pub lln_boundary: bool,
    pub heavy_tail: bool,
}

impl Evaluation {
    fn analytic(value: f64) -> Self {
        Evaluation {
            value,
            method: MethodTag::Analytic,
            stderr: None,
            lln_boundary: false,
            heavy_tail: false,
        }
    }

    fn from_mc(est: &McEstimate) -> Self {
        Evaluation {
            value: est.mean,
            method: MethodTag::Mc,
            stderr: Some(est.stderr),
            lln_boundary: false,
            heavy_tail: est.heavy_tail,
        }
    }
}

/// Closed-form `E[Y_{k:n}]`.
pub fn expected_time(scenario: &Scenario, n: u32, k: u32) -> Result<f64> {
    let job = JobConfig::new(n, k)?;
    let s = job.s();
    let sf = s as f64;
    let shift = scenario.shift.unwrap_or(0.0);
    use ScalingModel::*;
    use ServiceDistribution as D;
    match (scenario.dist, scenario.scaling) {
        (D::ShiftedExp(d), ServerDependent) => Ok(d.delta() + sf * exp_order_mean(n, k, d.w())?),
        (D::ShiftedExp(d), DataDependent) => Ok(sf * d.delta() + exp_order_mean(n, k, d.w())?),
        (D::ShiftedExp(d), Additive) => {
            let z = if d.w() == 0.0 {
                0.0
            } else if s == 1 {
                exp_order_mean(n, k, d.w())?
            } else if k == 1 {
                d.w() / n as f64 * birthday_expectation(n, n)?
            } else {
                erlang_order_mean(n, k, s, d.w())?
            };
            Ok(sf * d.delta() + z)
        }
        (D::Pareto(p), ServerDependent) => Ok(sf * pareto_order_mean(n, k, p.lambda(), p.alpha())?),
        (D::Pareto(p), DataDependent) => Ok(sf * shift + pareto_order_mean(n, k, p.lambda(), p.alpha())?),
        (D::Pareto(p), Additive) => {
            if k == n {
                pareto_order_mean(n, n, p.lambda(), p.alpha())
            } else {
                if p.alpha() <= 1.0 {
                    return Err(Error::MomentDoesNotExist {
                        order: 1.0,
                        alpha: p.alpha(),
                    });
                }
                Err(Error::NoClosedForm {
                    cell: scenario.cell(),
                    k,
                })
            }
        }
        (D::BiModal(b), ServerDependent) => Ok(sf * bimodal_order_mean(n, k, b.b(), b.eps())?),
        (D::BiModal(b), DataDependent) => Ok(sf * shift + bimodal_order_mean(n, k, b.b(), b.eps())?),
        (D::BiModal(b), Additive) => bimodal_sum_order_mean(n, k, s, b.b(), b.eps()),
    }
}

/// LLN approximation at rate `k/n`; only for bi-modal server and data
/// scaling.
pub fn lln_time(scenario: &Scenario, n: u32, k: u32) -> Result<LlnValue> {
    let job = JobConfig::new(n, k)?;
    match scenario.dist {
        ServiceDistribution::BiModal(b) if scenario.scaling != ScalingModel::Additive => {
            bimodal_lln(scenario.scaling, job.rate(), b.b(), b.eps(), scenario.shift)
        }
        _ => Err(Error::MethodUnavailable(format!(
            "LLN approximation exists only for bi-modal with server or data scaling, not {}",
            scenario.cell()
        ))),
    }
}

pub fn evaluate(scenario: &Scenario, n: u32, k: u32, method: EvalMethod) -> Result<Evaluation> {
    match method {
        EvalMethod::Analytic => expected_time(scenario, n, k).map(Evaluation::analytic),
        EvalMethod::MonteCarlo { trials, seed } => {
            montecarlo::estimate(scenario, n, k, trials, seed).map(|e| Evaluation::from_mc(&e))
        }
        EvalMethod::Lln => lln_time(scenario, n, k).map(|l| Evaluation {
            value: l.value,
            method: MethodTag::Lln,
            stderr: None,
            lln_boundary: l.boundary,
            heavy_tail: false,
        }),
        EvalMethod::Auto { trials, seed } => match expected_time(scenario, n, k) {
            Err(e) if e.is_method_unavailable() => {
                montecarlo::estimate(scenario, n, k, trials, seed).map(|e| Evaluation::from_mc(&e))
            }
            other => other.map(Evaluation::analytic),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: u32,
    pub s: u32,
    pub rate: f64,
    pub strategy: StrategyLabel,
    #[serde(serialize_with = "serialize_outcome")]
    pub outcome: std::result::Result<Evaluation, Error>,
}

fn serialize_outcome<S: serde::Serializer>(
    outcome: &std::result::Result<Evaluation, Error>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    match outcome {
        Ok(ev) => ev.serialize(ser),
        Err(e) => {
            let mut m = ser.serialize_map(Some(1))?;
            m.serialize_entry("unavailable", &e.to_string())?;
            m.end()
        }
    }
}

impl SweepRow {
    pub fn value(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|e| e.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub n: u32,
    pub rows: Vec<SweepRow>,
    /// Index into `rows` of the chosen optimum.
    pub optimal: Option<usize>,
    /// Every `k` whose value ties the minimum.
    pub ties: Vec<u32>,
}

impl SweepResult {
    pub fn optimal_row(&self) -> Option<&SweepRow> {
        self.optimal.map(|i| &self.rows[i])
    }

    pub fn optimal_k(&self) -> Option<u32> {
        self.optimal_row().map(|r| r.k)
    }
}

/// Index of the smallest value, ties within [`TIE_REL`] going to the last
/// (largest `k`) entry, plus the positions of all tied entries.
pub fn argmin_prefer_last(values: &[Option<f64>]) -> Option<(usize, Vec<usize>)> {
    let min = values
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let tied: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v, Some(x) if (x - min).abs() <= TIE_REL * min.abs()))
        .map(|(i, _)| i)
        .collect();
    tied.last().copied().map(|best| (best, tied))
}

/// Evaluates every divisor `k` of `n`. Rows that fail are kept and marked
/// unavailable.
pub fn sweep(scenario: &Scenario, n: u32, method: EvalMethod) -> Result<SweepResult> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let rows: Vec<SweepRow> = divisors(n)
        .into_iter()
        .map(|k| {
            let strategy = Strategy::new(n, k);
            SweepRow {
                k,
                s: n / k,
                rate: strategy.rate,
                strategy: strategy.label,
                outcome: evaluate(scenario, n, k, method),
            }
        })
        .collect();
    let values: Vec<Option<f64>> = rows.iter().map(SweepRow::value).collect();
    let (optimal, ties) = match argmin_prefer_last(&values) {
        Some((best, tied)) => (Some(best), tied.into_iter().map(|i| rows[i].k).collect()),
        None => (None, Vec::new()),
    };
    Ok(SweepResult {
        n,
        rows,
        optimal,
        ties,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KOptimum {
    /// Unconstrained real optimum from the closed-form condition.
    pub continuous: f64,
    /// Best divisor of `n`, found by exact evaluation.
    pub best_divisor: u32,
    pub note: Option<String>,
}

fn best_divisor_by<F: Fn(u32) -> Result<f64>>(n: u32, f: F) -> Result<u32> {
    let ks = divisors(n);
    let values = ks.iter().map(|&k| f(k).map(Some)).collect::<Result<Vec<_>>>()?;
    let (best, _) = argmin_prefer_last(&values).ok_or_else(|| Error::domain("no finite value in sweep"))?;
    Ok(ks[best])
}

/// Optimal `k` for shifted-exponential units under data-dependent scaling:
/// `k* = n(-d/2 + sqrt(d + d²/4))` with `d = Δ/W`.
pub fn optimal_k_sexp_data(n: u32, delta: f64, w: f64) -> Result<KOptimum> {
    let scenario = Scenario::new(ServiceDistribution::shifted_exp(delta, w)?, ScalingModel::DataDependent, None)?;
    if w == 0.0 {
        return Ok(KOptimum {
            continuous: n as f64,
            best_divisor: n,
            note: Some("degenerate deterministic service time: splitting".into()),
        });
    }
    let d = delta / w;
    // Same value as -d/2 + sqrt(d + d²/4) without the cancellation.
    let frac = d / (0.5 * d + (d + 0.25 * d * d).sqrt());
    let continuous = if d == 0.0 { 0.0 } else { n as f64 * frac };
    let best_divisor = best_divisor_by(n, |k| expected_time(&scenario, n, k))?;
    Ok(KOptimum {
        continuous,
        best_divisor,
        note: None,
    })
}

/// Server-dependent Pareto time with `s = n/k` allowed to be fractional.
pub fn pareto_server_time_relaxed(n: u32, k: u32, lambda: f64, alpha: f64) -> Result<f64> {
    Ok(n as f64 / k as f64 * pareto_order_mean(n, k, lambda, alpha)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoServerOptimum {
    pub continuous: f64,
    pub best_divisor: u32,
    /// All `k` in `1..=n` minimising the relaxed time (more than one on ties).
    pub unconstrained: Vec<u32>,
}

/// Optimal `k` for Pareto units under server-dependent scaling:
/// `k* = (αn - 1)/(α + 1)`.
pub fn optimal_k_pareto_server(n: u32, alpha: f64) -> Result<ParetoServerOptimum> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::MomentDoesNotExist { order: 1.0, alpha });
    }
    let continuous = (alpha * n as f64 - 1.0) / (alpha + 1.0);
    let best_divisor = best_divisor_by(n, |k| pareto_server_time_relaxed(n, k, 1.0, alpha))?;
    let all = (1..=n)
        .map(|k| pareto_server_time_relaxed(n, k, 1.0, alpha).map(Some))
        .collect::<Result<Vec<_>>>()?;
    let (_, tied) = argmin_prefer_last(&all).ok_or_else(|| Error::domain("no finite value"))?;
    Ok(ParetoServerOptimum {
        continuous,
        best_divisor,
        unconstrained: tied.into_iter().map(|i| i as u32 + 1).collect(),
    })
}

/// Data-dependent Pareto time with the gamma ratio replaced by its power
/// law: `nΔ/k + λ (n/(n-k))^{1/α}`.
pub fn pareto_data_approx(n: u32, k: u32, delta: f64, lambda: f64, alpha: f64) -> Result<f64> {
    if k == 0 || k >= n {
        return Err(Error::domain(format!("approximation needs 1 <= k < n, got k = {k}, n = {n}")));
    }
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::MomentDoesNotExist { order: 1.0, alpha });
    }
    let (n, k) = (n as f64, k as f64);
    Ok(n * delta / k + lambda * (n / (n - k)).powf(1.0 / alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlnValue {
    pub value: f64,
    /// `r` coincides with `1 - ε`, where the fast fraction is taken as 1/2.
    pub boundary: bool,
}

const BOUNDARY_TOL: f64 = 1e-12;

fn fast_fraction(r: f64, eps: f64) -> (f64, bool) {
    let fast = 1.0 - eps;
    if (fast - r).abs() <= BOUNDARY_TOL {
        (0.5, true)
    } else if fast > r {
        (1.0, false)
    } else {
        (0.0, false)
    }
}

fn lln_shift(scaling: ScalingModel, shift: Option<f64>) -> Result<f64> {
    match (scaling, shift) {
        (ScalingModel::ServerDependent, None) => Ok(0.0),
        (ScalingModel::ServerDependent, Some(_)) => Err(Error::invalid("server-dependent LLN takes no shift")),
        (ScalingModel::DataDependent, Some(d)) if d.is_finite() && d >= 0.0 => Ok(d),
        (ScalingModel::DataDependent, _) => Err(Error::invalid("data-dependent LLN needs a shift >= 0")),
        (ScalingModel::Additive, _) => Err(Error::MethodUnavailable(
            "LLN approximation is not defined for additive scaling".into(),
        )),
    }
}

/// Large-`n` limit of the bi-modal completion time at code rate `r`.
///
/// Server: `(p + B q)/r`. Data: `Δ/r + p + B q`. Here `p` is 1 when
/// `1 - ε > r`, 0 when `1 - ε < r` and 1/2 at equality, and `q = 1 - p`.
pub fn bimodal_lln(scaling: ScalingModel, r: f64, b: f64, eps: f64, shift: Option<f64>) -> Result<LlnValue> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("rate must be in (0, 1], got {r}")));
    }
    crate::distributions::BiModal::new(b, eps)?;
    let delta = lln_shift(scaling, shift)?;
    let (p, boundary) = fast_fraction(r, eps);
    let q = 1.0 - p;
    let value = match scaling {
        ScalingModel::ServerDependent => (p + b * q) / r,
        _ => delta / r + p + b * q,
    };
    Ok(LlnValue { value, boundary })
}

/// Straggling probability at which the LLN optimum moves from coding to
/// splitting: `(B-1)/B` (server) or `(B-1)/(Δ+B-1)` (data).
pub fn bimodal_lln_threshold(scaling: ScalingModel, b: f64, shift: Option<f64>) -> Result<f64> {
    if !(b.is_finite() && b > 1.0) {
        return Err(Error::invalid(format!("B must be > 1, got {b}")));
    }
    let delta = lln_shift(scaling, shift)?;
    Ok(match scaling {
        ScalingModel::ServerDependent => (b - 1.0) / b,
        _ => (b - 1.0) / (delta + b - 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlnOptimum {
    /// Minimising rate; for coding this is the supremum `1 - ε` approached
    /// from below.
    pub rate: f64,
    pub value: f64,
    pub label: StrategyLabel,
}

/// Minimum of the LLN curve over `r ∈ (0, 1]`: coding at `r → 1 - ε` when
/// `ε` is at most the threshold, splitting at `r = 1` otherwise.
pub fn bimodal_lln_optimum(scaling: ScalingModel, b: f64, eps: f64, shift: Option<f64>) -> Result<LlnOptimum> {
    crate::distributions::BiModal::new(b, eps)?;
    let delta = lln_shift(scaling, shift)?;
    let threshold = bimodal_lln_threshold(scaling, b, shift)?;
    let fast = 1.0 - eps;
    let coding_value = match scaling {
        ScalingModel::ServerDependent => 1.0 / fast,
        _ => delta / fast + 1.0,
    };
    if eps == 0.0 {
        return Ok(LlnOptimum {
            rate: 1.0,
            value: coding_value,
            label: StrategyLabel::Splitting,
        });
    }
    if eps <= threshold {
        Ok(LlnOptimum {
            rate: fast,
            value: coding_value,
            label: StrategyLabel::Coding,
        })
    } else {
        Ok(LlnOptimum {
            rate: 1.0,
            value: delta + b,
            label: StrategyLabel::Splitting,
        })
    }
}

/// Minimiser of the LLN curve restricted to the rates `k/n`, `k | n`.
pub fn bimodal_lln_divisor_argmin(scaling: ScalingModel, n: u32, b: f64, eps: f64, shift: Option<f64>) -> Result<u32> {
    let ks = divisors(n);
    let values = ks
        .iter()
        .map(|&k| bimodal_lln(scaling, k as f64 / n as f64, b, eps, shift).map(|l| Some(l.value)))
        .collect::<Result<Vec<_>>>()?;
    let (best, _) = argmin_prefer_last(&values).ok_or_else(|| Error::domain("no finite value"))?;
    Ok(ks[best])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    /// The bound degenerates to zero (its bracket is not positive).
    pub vacuous: bool,
}

/// Lower bound on the replication time of Pareto units under additive
/// scaling: `n(m-η)(1 - 21ξ/(n²η⁴))^n` with `m` the mean and `ξ` the fourth
/// moment.
pub fn pareto_replication_lower_bound(n: u32, lambda: f64, alpha: f64, eta: f64) -> Result<LowerBound> {
    let p = crate::distributions::Pareto::new(lambda, alpha)?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("eta must be > 0, got {eta}")));
    }
    let xi = p.raw_moment(4.0)?;
    let m = p.raw_moment(1.0)?;
    let nf = n as f64;
    let bracket = 1.0 - 21.0 * xi / (nf * nf * eta.powi(4));
    if bracket <= 0.0 {
        return Ok(LowerBound {
            value: 0.0,
            vacuous: true,
        });
    }
    Ok(LowerBound {
        value: nf * (m - eta) * bracket.powf(nf),
        vacuous: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Splitting,
    Replication,
    Tie,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Splitting => "splitting",
            Self::Replication => "replication",
            Self::Tie => "tie",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub trials: u64,
    pub seed: u64,
    /// Deviation parameter of the Pareto lower bound.
    pub eta: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            trials: montecarlo::DEFAULT_TRIALS,
            seed: montecarlo::DEFAULT_SEED,
            eta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReplicationReport {
    pub n: u32,
    pub splitting: f64,
    pub replication: Evaluation,
    pub lower_bound: Option<LowerBound>,
    pub verdict: Verdict,
}

/// Splitting (`k = n`) against replication (`k = 1`) under additive scaling.
pub fn splitting_vs_replication_report(scenario: &Scenario, n: u32, opts: ReportOptions) -> Result<SplitReplicationReport> {
    if scenario.scaling != ScalingModel::Additive {
        return Err(Error::invalid("the splitting/replication report is defined for additive scaling"));
    }
    let splitting = expected_time(scenario, n, n)?;
    let replication = evaluate(
        scenario,
        n,
        1,
        EvalMethod::Auto {
            trials: opts.trials,
            seed: opts.seed,
        },
    )?;
    let lower_bound = match scenario.dist {
        ServiceDistribution::Pareto(p) if p.alpha() > 4.0 && n > 1 => {
            Some(pareto_replication_lower_bound(n, p.lambda(), p.alpha(), opts.eta)?)
        }
        _ => None,
    };
    let verdict = if lower_bound.is_some_and(|b| !b.vacuous && b.value > splitting) {
        Verdict::Splitting
    } else if (replication.value - splitting).abs() <= TIE_REL * splitting.abs() {
        Verdict::Tie
    } else if splitting < replication.value {
        Verdict::Splitting
    } else {
        Verdict::Replication
    };
    Ok(SplitReplicationReport {
        n,
        splitting,
        replication,
        lower_bound,
        verdict,
    })
}

/// Smallest `n` in `1..=n_max` from which splitting beats replication for
/// every larger `n` in the range, for shifted-exponential units under
/// additive scaling.
pub fn sexp_additive_splitting_threshold(delta: f64, w: f64, n_max: u32) -> Result<Option<u32>> {
    let scenario = Scenario::new(ServiceDistribution::shifted_exp(delta, w)?, ScalingModel::Additive, None)?;
    let mut first = None;
    for n in 1..=n_max {
        let split = expected_time(&scenario, n, n)?;
        let repl = expected_time(&scenario, n, 1)?;
        if split < repl * (1.0 - TIE_REL) {
            first.get_or_insert(n);
        } else {
            first = None;
        }
    }
    Ok(first)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdComparison {
    pub eps: f64,
    pub threshold: f64,
    pub regime: StrategyLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalReport {
    pub scenario: Scenario,
    pub n: u32,
    pub best_k: Option<u32>,
    pub strategy: Option<StrategyLabel>,
    pub expected_time: Option<f64>,
    pub continuous_k: Option<f64>,
    pub threshold: Option<ThresholdComparison>,
    pub ties: Vec<u32>,
    pub sweep: SweepResult,
}

/// Best divisor by sweep, plus the continuous optimum and the LLN threshold
/// where the model provides them.
pub fn optimal_report(scenario: &Scenario, n: u32, method: EvalMethod) -> Result<OptimalReport> {
    let sweep = sweep(scenario, n, method)?;
    let continuous_k = match (scenario.dist, scenario.scaling) {
        (ServiceDistribution::ShiftedExp(d), ScalingModel::DataDependent) if d.w() > 0.0 => {
            Some(optimal_k_sexp_data(n, d.delta(), d.w())?.continuous)
        }
        (ServiceDistribution::Pareto(p), ScalingModel::ServerDependent) if p.alpha() > 1.0 => {
            Some((p.alpha() * n as f64 - 1.0) / (p.alpha() + 1.0))
        }
        _ => None,
    };
    let threshold = match (scenario.dist, scenario.scaling) {
        (ServiceDistribution::BiModal(b), s @ (ScalingModel::ServerDependent | ScalingModel::DataDependent)) => {
            let opt = bimodal_lln_optimum(s, b.b(), b.eps(), scenario.shift)?;
            Some(ThresholdComparison {
                eps: b.eps(),
                threshold: bimodal_lln_threshold(s, b.b(), scenario.shift)?,
                regime: opt.label,
            })
        }
        _ => None,
    };
    let row = sweep.optimal_row();
    Ok(OptimalReport {
        scenario: *scenario,
        n,
        best_k: row.map(|r| r.k),
        strategy: row.map(|r| r.strategy),
        expected_time: row.and_then(SweepRow::value),
        continuous_k,
        threshold,
        ties: sweep.ties.clone(),
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::harmonic;
    use proptest::prelude::*;

    fn sc(dist: &str, scaling: ScalingModel, shift: Option<f64>) -> Scenario {
        Scenario::new(dist.parse().unwrap(), scaling, shift).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(60), vec![1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
    }

    #[test]
    fn job_config_rules() {
        assert!(JobConfig::new(12, 5).is_err());
        assert!(JobConfig::new(12, 13).is_err());
        assert!(JobConfig::new(0, 1).is_err());
        let j = JobConfig::new(12, 4).unwrap();
        assert_eq!((j.s(), j.rate()), (3, 1.0 / 3.0));
        assert_eq!(super::Strategy::new(12, 1).label, StrategyLabel::Replication);
        assert_eq!(super::Strategy::new(12, 12).label, StrategyLabel::Splitting);
        assert_eq!(super::Strategy::new(12, 3).label, StrategyLabel::Coding);
    }

    #[test]
    fn dispatcher_examples() {
        let det = sc("sexp:1,0", ScalingModel::ServerDependent, None);
        for k in divisors(12) {
            assert_eq!(expected_time(&det, 12, k).unwrap(), 1.0);
        }
        let bi = sc("bimodal:10,0.005", ScalingModel::ServerDependent, None);
        let want = 1.0 + 9.0 * (1.0 - 0.995f64.powi(12));
        assert!(close(expected_time(&bi, 12, 12).unwrap(), want, 1e-13));
        assert!((expected_time(&bi, 12, 12).unwrap() - 1.52538).abs() < 2e-5);
        let par = sc("pareto:1,2", ScalingModel::ServerDependent, None);
        let product: f64 = 2.0 * (0..6).map(|i| (12 - i) as f64 / (11.5 - i as f64)).product::<f64>();
        assert!(close(expected_time(&par, 12, 6).unwrap(), product, 1e-13));
    }

    #[test]
    fn additive_pareto_has_no_closed_form_below_splitting() {
        let par = sc("pareto:1,2", ScalingModel::Additive, None);
        assert!(matches!(expected_time(&par, 12, 6), Err(Error::NoClosedForm { k: 6, .. })));
        assert!(matches!(expected_time(&par, 12, 1), Err(Error::NoClosedForm { k: 1, .. })));
        let split = expected_time(&par, 12, 12).unwrap();
        assert!(close(split, pareto_order_mean(12, 12, 1.0, 2.0).unwrap(), 1e-15));
        let heavy = sc("pareto:1,0.9", ScalingModel::Additive, None);
        assert!(matches!(expected_time(&heavy, 12, 6), Err(Error::MomentDoesNotExist { .. })));
    }

    #[test]
    fn sweep_examples() {
        let r = sweep(&sc("sexp:1,5", ScalingModel::ServerDependent, None), 12, EvalMethod::Analytic).unwrap();
        assert_eq!(r.rows.len(), 6);
        assert_eq!(r.optimal_k(), Some(1));
        let r = sweep(&sc("bimodal:10,0.4", ScalingModel::Additive, None), 12, EvalMethod::Analytic).unwrap();
        assert_eq!(r.optimal_k(), Some(6));
        assert_eq!(r.optimal_row().unwrap().rate, 0.5);
        let r = sweep(&sc("pareto:1,2", ScalingModel::ServerDependent, None), 1, EvalMethod::Analytic).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.optimal_k(), Some(1));
    }

    #[test]
    fn sweep_marks_unavailable_rows_and_ties_go_to_larger_k() {
        let par = sc("pareto:1,2", ScalingModel::Additive, None);
        let r = sweep(&par, 12, EvalMethod::Analytic).unwrap();
        assert_eq!(r.rows.iter().filter(|row| row.outcome.is_err()).count(), 5);
        assert_eq!(r.optimal_k(), Some(12));
        let flat = sc("sexp:1,0", ScalingModel::ServerDependent, None);
        let r = sweep(&flat, 12, EvalMethod::Analytic).unwrap();
        assert_eq!(r.optimal_k(), Some(12));
        assert_eq!(r.ties, divisors(12));
    }

    #[test]
    fn sexp_data_optimum() {
        let o = optimal_k_sexp_data(12, 1.0, 1.0).unwrap();
        assert!(close(o.continuous, 12.0 * (-0.5 + 1.25f64.sqrt()), 1e-14));
        // Brute force over the divisors of the data-dependent closed form.
        let brute = divisors(12)
            .into_iter()
            .map(|k| {
                let s = (12 / k) as f64;
                (k, s + harmonic(12) - harmonic((12 - k) as u64))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        assert_eq!(o.best_divisor, brute);
        assert!(optimal_k_sexp_data(12, 1e-9, 1.0).unwrap().continuous / 12.0 < 1e-3);
        assert!(optimal_k_sexp_data(12, 1e9, 1.0).unwrap().continuous / 12.0 > 0.999);
        assert_eq!(optimal_k_sexp_data(12, 0.0, 1.0).unwrap().best_divisor, 1);
        let det = optimal_k_sexp_data(12, 3.0, 0.0).unwrap();
        assert_eq!(det.best_divisor, 12);
        assert!(det.note.is_some());
    }

    #[test]
    fn pareto_server_optimum() {
        let cases = [(1.5, 6.8), (2.0, 23.0 / 3.0), (3.0, 8.75), (5.0, 59.0 / 6.0)];
        for (alpha, want) in cases {
            let o = optimal_k_pareto_server(12, alpha).unwrap();
            assert!(close(o.continuous, want, 1e-14), "alpha={alpha}");
        }
        let o = optimal_k_pareto_server(12, 2.0).unwrap();
        assert!(o.unconstrained.iter().all(|k| [7, 8].contains(k)), "{:?}", o.unconstrained);
        assert!(optimal_k_pareto_server(12, 1.0).is_err());
    }

    #[test]
    fn pareto_data_approximation() {
        let v = pareto_data_approx(12, 6, 5.0, 1.0, 3.0).unwrap();
        assert!(close(v, 10.0 + 2f64.powf(1.0 / 3.0), 1e-15));
        assert!((v - 11.2599).abs() < 1e-4);
        let exact = 5.0 + pareto_order_mean(100, 50, 1.0, 3.0).unwrap();
        let approx = pareto_data_approx(100, 50, 5.0 / 2.0, 1.0, 3.0).unwrap();
        // nΔ/k with Δ = 2.5 equals sΔ with s = 2, Δ = 2.5.
        assert!(((approx - exact) / exact).abs() <= 0.02);
        assert!(close(pareto_data_approx(100_000, 1, 0.0, 1.0, 2.0).unwrap(), 1.0, 1e-5));
        assert!(pareto_data_approx(12, 12, 5.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn lln_examples() {
        let v = bimodal_lln(ScalingModel::ServerDependent, 1.0, 10.0, 0.3, None).unwrap();
        assert_eq!(v.value, 10.0);
        let below = bimodal_lln(ScalingModel::ServerDependent, 0.7 - 1e-9, 10.0, 0.3, None).unwrap();
        assert!(close(below.value, 1.0 / 0.7, 1e-8));
        let at = bimodal_lln(ScalingModel::ServerDependent, 0.7, 10.0, 0.3, None).unwrap();
        assert!(at.boundary);
        assert!(close(at.value, 5.5 / 0.7, 1e-12));
        let opt = bimodal_lln_optimum(ScalingModel::DataDependent, 10.0, 0.6, Some(5.0)).unwrap();
        assert!(close(opt.rate, 0.4, 1e-12));
        assert!(close(opt.value, 13.5, 1e-12));
        assert_eq!(opt.label, StrategyLabel::Coding);
        let split = bimodal_lln(ScalingModel::DataDependent, 1.0, 10.0, 0.6, Some(5.0)).unwrap();
        assert_eq!(split.value, 15.0);
        assert!(bimodal_lln(ScalingModel::Additive, 0.5, 10.0, 0.3, None).is_err());
        assert!(bimodal_lln(ScalingModel::ServerDependent, 0.0, 10.0, 0.3, None).is_err());
    }

    #[test]
    fn lln_thresholds() {
        assert!(close(bimodal_lln_threshold(ScalingModel::ServerDependent, 10.0, None).unwrap(), 0.9, 1e-15));
        // With no shift coding always wins the LLN comparison; a unit shift
        // reproduces the server-dependent threshold.
        assert_eq!(bimodal_lln_threshold(ScalingModel::DataDependent, 10.0, Some(0.0)).unwrap(), 1.0);
        assert!(close(bimodal_lln_threshold(ScalingModel::DataDependent, 10.0, Some(1.0)).unwrap(), 0.9, 1e-15));
        assert!(close(
            bimodal_lln_threshold(ScalingModel::DataDependent, 10.0, Some(5.0)).unwrap(),
            9.0 / 14.0,
            1e-15
        ));
    }

    #[test]
    fn pareto_lower_bound_examples() {
        let b = pareto_replication_lower_bound(100, 1.0, 4.5, 1.0).unwrap();
        let want = 100.0 * (2.0 / 7.0) * (1.0f64 - 189.0 / 10_000.0).powi(100);
        assert!(close(b.value, want, 1e-13));
        assert!((b.value - 4.23).abs() < 0.02);
        assert!(pareto_replication_lower_bound(13, 1.0, 4.5, 1.0).unwrap().vacuous);
        assert!(!pareto_replication_lower_bound(14, 1.0, 4.5, 1.0).unwrap().vacuous);
        assert!(matches!(
            pareto_replication_lower_bound(100, 1.0, 4.0, 1.0),
            Err(Error::MomentDoesNotExist { .. })
        ));
    }

    #[test]
    fn split_vs_replication() {
        let sexp = sc("sexp:0,1", ScalingModel::Additive, None);
        let r = splitting_vs_replication_report(&sexp, 12, ReportOptions::default()).unwrap();
        assert!(close(r.splitting, harmonic(12), 1e-14));
        assert!(close(r.replication.value, 84.643_475_443_420_9 / 12.0, 1e-9));
        assert_eq!(r.verdict, Verdict::Splitting);
        let one = splitting_vs_replication_report(&sexp, 1, ReportOptions::default()).unwrap();
        assert_eq!(one.verdict, Verdict::Tie);
        assert_eq!(sexp_additive_splitting_threshold(0.0, 1.0, 200).unwrap(), Some(4));
        let par = sc("pareto:1,4.5", ScalingModel::Additive, None);
        let opts = ReportOptions {
            trials: 2_000,
            ..ReportOptions::default()
        };
        let r = splitting_vs_replication_report(&par, 100, opts).unwrap();
        assert_eq!(r.replication.method, MethodTag::Mc);
        assert!(r.lower_bound.unwrap().value > r.splitting);
        assert_eq!(r.verdict, Verdict::Splitting);
        assert!(splitting_vs_replication_report(&par, 1, opts).unwrap().verdict == Verdict::Tie);
    }

    #[test]
    fn optimal_reports() {
        let r = optimal_report(&sc("pareto:1,1.5", ScalingModel::ServerDependent, None), 12, EvalMethod::Analytic)
            .unwrap();
        assert!(close(r.continuous_k.unwrap(), 6.8, 1e-14));
        assert_eq!(r.best_k, Some(6));
        let r = optimal_report(&sc("sexp:10,1", ScalingModel::DataDependent, None), 12, EvalMethod::Analytic).unwrap();
        assert_eq!(r.strategy, Some(StrategyLabel::Splitting));
        let r = optimal_report(&sc("bimodal:10,0.95", ScalingModel::ServerDependent, None), 12, EvalMethod::Analytic)
            .unwrap();
        assert_eq!(r.strategy, Some(StrategyLabel::Splitting));
        assert_eq!(r.threshold.unwrap().regime, StrategyLabel::Splitting);
        let r = optimal_report(&sc("bimodal:10,0.2", ScalingModel::ServerDependent, None), 12, EvalMethod::Analytic)
            .unwrap();
        assert!((2..=6).contains(&r.best_k.unwrap()));
    }

    #[test]
    fn auto_method_falls_back_to_monte_carlo() {
        let par = sc("pareto:1,2", ScalingModel::Additive, None);
        let method = EvalMethod::Auto { trials: 1_000, seed: 5 };
        let r = sweep(&par, 12, method).unwrap();
        assert!(r.rows.iter().all(|row| row.outcome.is_ok()));
        assert_eq!(r.rows.last().unwrap().outcome.as_ref().unwrap().method, MethodTag::Analytic);
        assert_eq!(r.rows[0].outcome.as_ref().unwrap().method, MethodTag::Mc);
    }

    #[test]
    fn sexp_server_strictly_increasing_in_k() {
        for w in [0.5, 5.0, 10.0] {
            let s = sc(&format!("sexp:1,{w}"), ScalingModel::ServerDependent, None);
            let vals: Vec<f64> = divisors(12).iter().map(|&k| expected_time(&s, 12, k).unwrap()).collect();
            assert!(vals.windows(2).all(|p| p[1] > p[0]), "{vals:?}");
            // Over all k, with s = n/k fractional.
            let all: Vec<f64> = (1..=12)
                .map(|k| 1.0 + 12.0 / k as f64 * exp_order_mean(12, k, w).unwrap())
                .collect();
            assert!(all.windows(2).all(|p| p[1] > p[0]));
        }
    }

    #[test]
    fn additive_half_rate_beats_splitting() {
        let s = sc("sexp:0,1", ScalingModel::Additive, None);
        for n in [4, 6, 8, 10, 12] {
            assert!(expected_time(&s, n, n / 2).unwrap() <= expected_time(&s, n, n).unwrap());
        }
    }

    #[test]
    fn small_straggling_magnitude_favours_splitting() {
        for b in [1.1, 1.5, 2.0] {
            for i in 0..=10 {
                let eps = i as f64 / 10.0;
                for n in [2, 4, 6, 12] {
                    for scaling in [ScalingModel::ServerDependent, ScalingModel::Additive] {
                        let s = sc(&format!("bimodal:{b},{eps}"), scaling, None);
                        let r = sweep(&s, n, EvalMethod::Analytic).unwrap();
                        assert_eq!(r.optimal_k(), Some(n), "B={b} eps={eps} n={n} {scaling}");
                    }
                }
            }
        }
    }

    #[test]
    fn sexp_data_optimum_is_floor_or_ceil() {
        for alpha in [1.1, 1.5, 2.0, 3.0, 5.0, 10.0] {
            for n in 5..=40u32 {
                let o = optimal_k_pareto_server(n, alpha).unwrap();
                let lo = o.continuous.floor().max(1.0) as u32;
                let hi = (o.continuous.ceil() as u32).clamp(1, n);
                let best = |k| pareto_server_time_relaxed(n, k, 1.0, alpha).unwrap();
                let global = (1..=n).map(best).fold(f64::INFINITY, f64::min);
                let candidate = best(lo).min(best(hi));
                assert!(
                    (candidate - global).abs() <= TIE_REL * global,
                    "alpha={alpha} n={n} k*={} minimisers={:?}",
                    o.continuous,
                    o.unconstrained
                );
            }
        }
    }

    #[test]
    fn lln_error_shrinks_with_n() {
        for &eps in &[0.2, 0.6] {
            // Rates 1/4 and 1/2, both away from 1 - eps.
            for &r in &[0.25, 0.5] {
                let s = sc(&format!("bimodal:10,{eps}"), ScalingModel::ServerDependent, None);
                let lln = bimodal_lln(ScalingModel::ServerDependent, r, 10.0, eps, None).unwrap().value;
                let gaps: Vec<f64> = [12u32, 60, 300, 1500]
                    .iter()
                    .map(|&n| {
                        let k = (r * n as f64).round() as u32;
                        (expected_time(&s, n, k).unwrap() - lln).abs()
                    })
                    .collect();
                assert!(gaps.windows(2).all(|g| g[1] < g[0] || g[1] <= 1e-12), "eps={eps} r={r} {gaps:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn sweep_rows_are_divisors_in_order(n in 1u32..200) {
            let s = sc("bimodal:10,0.3", ScalingModel::ServerDependent, None);
            let r = sweep(&s, n, EvalMethod::Analytic).unwrap();
            let ks: Vec<u32> = r.rows.iter().map(|row| row.k).collect();
            prop_assert_eq!(ks, divisors(n));
            let best = r.optimal_row().unwrap().value().unwrap();
            for row in &r.rows {
                prop_assert!(row.value().unwrap() >= best * (1.0 - TIE_REL));
            }
        }

        #[test]
        fn threshold_separates_lln_regimes(b in 1.1f64..200.0, delta in 0.0f64..20.0, eps in 0.001f64..0.999) {
            for (scaling, shift) in [(ScalingModel::ServerDependent, None), (ScalingModel::DataDependent, Some(delta))] {
                let t = bimodal_lln_threshold(scaling, b, shift).unwrap();
                let opt = bimodal_lln_optimum(scaling, b, eps, shift).unwrap();
                let split = bimodal_lln(scaling, 1.0, b, eps, shift).unwrap().value;
                if eps < t * (1.0 - 1e-9) {
                    prop_assert_eq!(opt.label, StrategyLabel::Coding);
                    prop_assert!(opt.value <= split * (1.0 + 1e-12));
                } else if eps > t * (1.0 + 1e-9) {
                    prop_assert_eq!(opt.label, StrategyLabel::Splitting);
                    let fast = 1.0 - eps;
                    let coding = match scaling {
                        ScalingModel::ServerDependent => 1.0 / fast,
                        _ => delta / fast + 1.0,
                    };
                    prop_assert!(split <= coding * (1.0 + 1e-12));
                }
            }
        }
    }
}
