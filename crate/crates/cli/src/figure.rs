use std::io::Write;

use redundancy_core::analysis::{self, bimodal_lln, expected_time, pareto_replication_lower_bound};
use redundancy_core::{EvalMethod, ScalingModel, Scenario, ServiceDistribution};

use crate::args::FigureArgs;
use crate::output::{g17, opt_g17, sink};
use crate::sweep::require_all_rows;
use crate::CliError;

pub const FIGURE_IDS: [&str; 16] = [
    "fig3",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
    "fig14",
    "fig16",
    "bimodal-server-eps",
    "bimodal-server-b",
    "fig11-lln",
    "bimodal-data-eps",
    "bimodal-data-b",
    "bimodal-data-lln",
    "bimodal-additive-eps",
    "bimodal-additive-b",
];

/// Trials for the figures that are simulated by construction.
pub const FIGURE_TRIALS: u64 = 10_000;

struct Series {
    label: String,
    scenario: Scenario,
}

fn series(label: String, dist: ServiceDistribution, scaling: ScalingModel, shift: Option<f64>) -> Series {
    Series {
        label,
        scenario: Scenario::new(dist, scaling, shift).expect("figure parameters are valid"),
    }
}

fn sexp(delta: f64, w: f64) -> ServiceDistribution {
    ServiceDistribution::shifted_exp(delta, w).expect("valid sexp")
}

fn pareto(lambda: f64, alpha: f64) -> ServiceDistribution {
    ServiceDistribution::pareto(lambda, alpha).expect("valid pareto")
}

fn bimodal(b: f64, eps: f64) -> ServiceDistribution {
    ServiceDistribution::bimodal(b, eps).expect("valid bimodal")
}

/// Five W/Δ ratios: 0, 0.1, 1, 10 and infinite.
const W_DELTA_PAIRS: [(f64, f64); 5] = [(10.0, 0.0), (10.0, 1.0), (5.0, 5.0), (1.0, 10.0), (0.0, 10.0)];

fn sexp_series(scaling: ScalingModel, pairs: &[(f64, f64)]) -> Vec<Series> {
    pairs
        .iter()
        .map(|&(d, w)| series(format!("delta={d} W={w}"), sexp(d, w), scaling, None))
        .collect()
}

fn k_series(id: &str) -> Option<Vec<Series>> {
    use ScalingModel::*;
    let alphas = [1.5, 2.0, 3.0, 5.0];
    Some(match id {
        "fig3" => sexp_series(
            ServerDependent,
            &[(1.0, 0.0), (1.0, 5.0), (1.0, 10.0), (0.0, 1.0), (5.0, 1.0), (10.0, 1.0)],
        ),
        "fig4" => sexp_series(DataDependent, &W_DELTA_PAIRS),
        "fig5" => sexp_series(Additive, &W_DELTA_PAIRS),
        "fig6" => alphas
            .iter()
            .map(|&a| series(format!("alpha={a}"), pareto(1.0, a), ServerDependent, None))
            .collect(),
        "fig7" => alphas
            .iter()
            .map(|&a| series(format!("alpha={a}"), pareto(1.0, a), DataDependent, Some(5.0)))
            .collect(),
        "fig8" => [0.1, 0.5, 5.0, 10.0]
            .iter()
            .map(|&d| series(format!("delta={d}"), pareto(5.0, 3.0), DataDependent, Some(d)))
            .collect(),
        "fig14" => [1.3, 2.0, 3.0, 5.0]
            .iter()
            .map(|&a| series(format!("alpha={a}"), pareto(1.0, a), Additive, None))
            .collect(),
        "bimodal-server-eps" => [0.005, 0.2, 0.4, 0.6, 0.8, 0.9]
            .iter()
            .map(|&e| series(format!("eps={e}"), bimodal(10.0, e), ServerDependent, None))
            .collect(),
        "bimodal-server-b" => [2.0, 5.0, 10.0, 15.0]
            .iter()
            .map(|&b| series(format!("B={b}"), bimodal(b, 0.6), ServerDependent, None))
            .collect(),
        "bimodal-data-eps" => [0.05, 0.2, 0.5, 0.6, 0.9]
            .iter()
            .map(|&e| series(format!("eps={e}"), bimodal(10.0, e), DataDependent, Some(5.0)))
            .collect(),
        "bimodal-data-b" => [2.0, 10.0, 30.0, 60.0]
            .iter()
            .map(|&b| series(format!("B={b}"), bimodal(b, 0.6), DataDependent, Some(5.0)))
            .collect(),
        "bimodal-additive-eps" => [0.005, 0.2, 0.6, 0.9]
            .iter()
            .map(|&e| series(format!("eps={e}"), bimodal(10.0, e), Additive, None))
            .collect(),
        "bimodal-additive-b" => [2.0, 5.0, 10.0, 20.0]
            .iter()
            .map(|&b| series(format!("B={b}"), bimodal(b, 0.4), Additive, None))
            .collect(),
        _ => return None,
    })
}

fn lln_scenario(id: &str) -> Option<(ScalingModel, Option<f64>)> {
    match id {
        "fig11-lln" => Some((ScalingModel::ServerDependent, None)),
        "bimodal-data-lln" => Some((ScalingModel::DataDependent, Some(5.0))),
        _ => None,
    }
}

type Record = [String; 5];

fn record(series: &str, axis: &str, x: f64, value: f64, stderr: Option<f64>) -> Record {
    [series.to_string(), axis.to_string(), g17(x), g17(value), opt_g17(stderr)]
}

fn k_rows(list: &[Series], n: u32, method: EvalMethod) -> Result<Vec<Record>, CliError> {
    let mut rows = Vec::new();
    for s in list {
        let result = analysis::sweep(&s.scenario, n, method)?;
        require_all_rows(&result)?;
        for row in &result.rows {
            let e = row.outcome.as_ref().expect("rows checked");
            rows.push(record(&s.label, "k", row.k as f64, e.value, e.stderr));
        }
    }
    Ok(rows)
}

fn lln_rows(scaling: ScalingModel, shift: Option<f64>, n: u32) -> Result<Vec<Record>, CliError> {
    let mut rows = Vec::new();
    for eps in [0.2, 0.6, 0.9] {
        for i in 1..=n {
            let r = i as f64 / n as f64;
            let v = bimodal_lln(scaling, r, 10.0, eps, shift)?;
            rows.push(record(&format!("lln eps={eps}"), "r", r, v.value, None));
        }
    }
    for eps in [0.2, 0.6, 0.9] {
        let sc = Scenario::new(bimodal(10.0, eps), scaling, shift)?;
        for k in analysis::divisors(n) {
            let v = expected_time(&sc, n, k)?;
            rows.push(record(&format!("exact eps={eps}"), "k", k as f64, v, None));
        }
    }
    Ok(rows)
}

/// Replication by simulation against splitting and the replication lower
/// bound, for Pareto(1, 4.5) units under additive scaling.
fn bound_rows(ns: &[u32], trials: u64, seed: u64) -> Result<Vec<Record>, CliError> {
    let (lambda, alpha, eta) = (1.0, 4.5, 1.0);
    let sc = Scenario::new(pareto(lambda, alpha), ScalingModel::Additive, None)?;
    let mut rows = Vec::new();
    for &n in ns {
        let est = redundancy_core::montecarlo::estimate(&sc, n, 1, trials, seed)?;
        rows.push(record("replication", "n", n as f64, est.mean, Some(est.stderr)));
    }
    for &n in ns {
        rows.push(record("splitting", "n", n as f64, expected_time(&sc, n, n)?, None));
    }
    for &n in ns {
        let lb = pareto_replication_lower_bound(n, lambda, alpha, eta)?;
        rows.push(record("lower bound", "n", n as f64, lb.value, None));
    }
    Ok(rows)
}

fn unknown(id: &str) -> CliError {
    CliError::usage(format!("unknown figure '{id}'; supported: {}", FIGURE_IDS.join(", ")))
}

pub fn run_figure(args: &FigureArgs) -> Result<(), CliError> {
    let id = args.id.as_str();
    if !FIGURE_IDS.contains(&id) {
        return Err(unknown(id));
    }
    let simulated = matches!(id, "fig14" | "fig16");
    let trials = args.trials.unwrap_or(if simulated {
        FIGURE_TRIALS
    } else {
        redundancy_core::montecarlo::DEFAULT_TRIALS
    });
    let rows = if id == "fig16" {
        let grid = match &args.n_grid {
            Some(g) => g.0.clone(),
            None => (1..=10).map(|i| 20.0 * i as f64).collect(),
        };
        let ns = grid
            .iter()
            .map(|&x| {
                if x >= 2.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                    Ok(x as u32)
                } else {
                    Err(CliError::usage(format!("--n-grid values must be integers >= 2, got {x}")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        bound_rows(&ns, trials, args.seed)?
    } else if let Some((scaling, shift)) = lln_scenario(id) {
        lln_rows(scaling, shift, args.n.unwrap_or(60))?
    } else {
        let list = k_series(id).ok_or_else(|| unknown(id))?;
        let method = EvalMethod::Auto { trials, seed: args.seed };
        k_rows(&list, args.n.unwrap_or(12), method)?
    };

    let mut out = sink(args.out.as_deref())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(["series", "x_axis", "x", "value", "stderr"])?;
        for r in &rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_k_figure_is_defined() {
        for id in FIGURE_IDS {
            let known = k_series(id).is_some() || lln_scenario(id).is_some() || id == "fig16";
            assert!(known, "{id}");
        }
        assert_eq!(k_series("fig3").unwrap().len(), 6);
        assert_eq!(k_series("fig4").unwrap().len(), 5);
    }
}
