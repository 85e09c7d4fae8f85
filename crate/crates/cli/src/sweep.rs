use std::io::Write;

use redundancy_core::analysis::{self, optimal_report, pareto_replication_lower_bound, MethodTag, OptimalReport, SweepRow};
use redundancy_core::{EvalMethod, ScalingModel, Scenario, ServiceDistribution, SweepResult};
use serde_json::{json, Value};

use crate::args::{MethodArgs, OptimalArgs, ReportFormat, ScenarioArgs, SweepArgs, TableFormat};
use crate::output::{g17, opt_g17, sink};
use crate::CliError;

/// The first failed row as an error; a sweep is only reported whole.
pub fn require_all_rows(result: &SweepResult) -> Result<(), CliError> {
    for row in &result.rows {
        if let Err(e) = &row.outcome {
            let mut err = CliError::from(e.clone());
            err.message = format!("k={}: {}", row.k, err.message);
            if e.is_method_unavailable() {
                err.message.push_str(" (try --method mc or --method auto)");
            }
            return Err(err);
        }
    }
    Ok(())
}

/// Caveats go to stderr so stdout stays a clean table.
pub fn print_notes(scenario: &Scenario, result: &SweepResult, method: EvalMethod) {
    let rows: Vec<&SweepRow> = result.rows.iter().collect();
    let ok = |r: &&SweepRow| r.outcome.as_ref().ok().cloned();
    if let EvalMethod::Auto { trials, seed } = method {
        let fallback: Vec<String> = rows
            .iter()
            .filter(|r| ok(r).is_some_and(|e| e.method == MethodTag::Mc))
            .map(|r| r.k.to_string())
            .collect();
        if !fallback.is_empty() {
            eprintln!(
                "note: no closed form for k in {{{}}}; Monte Carlo with {trials} trials, seed {seed}",
                fallback.join(",")
            );
        }
    }
    if rows.iter().any(|r| ok(r).is_some_and(|e| e.heavy_tail)) {
        eprintln!("note: alpha <= 2 gives infinite variance; Monte Carlo stderr understates the spread");
    }
    for r in rows.iter().filter(|r| ok(r).is_some_and(|e| e.lln_boundary)) {
        eprintln!("note: k={} sits at rate 1 - eps; the LLN value there uses p = 1/2", r.k);
    }
    if let (ServiceDistribution::Pareto(p), ScalingModel::Additive) = (scenario.dist, scenario.scaling) {
        if p.alpha() > 4.0 && result.n > 1 {
            if let Ok(lb) = pareto_replication_lower_bound(result.n, p.lambda(), p.alpha(), 1.0) {
                if lb.vacuous {
                    eprintln!("note: replication lower bound (eta = 1) is vacuous at n = {}", result.n);
                } else {
                    eprintln!("note: replication lower bound (eta = 1): {}", g17(lb.value));
                }
            }
        }
    }
}

fn config_json(command: &str, sc: &ScenarioArgs, method: &MethodArgs) -> Value {
    json!({
        "command": command,
        "dist": sc.dist.to_string(),
        "scaling": sc.scaling.token(),
        "n": sc.n,
        "shift": sc.shift,
        "method": method.token(),
        "trials": method.mc.trials,
        "seed": method.mc.seed,
    })
}

fn row_json(row: &SweepRow, optimal: bool) -> Value {
    match &row.outcome {
        Ok(e) => json!({
            "k": row.k,
            "s": row.s,
            "rate": row.rate,
            "strategy": row.strategy,
            "expected_time": e.value,
            "method": e.method,
            "stderr": e.stderr,
            "is_optimal": optimal,
            "lln_boundary": e.lln_boundary,
            "heavy_tail": e.heavy_tail,
        }),
        Err(err) => json!({
            "k": row.k,
            "s": row.s,
            "rate": row.rate,
            "strategy": row.strategy,
            "unavailable": err.to_string(),
        }),
    }
}

fn optimal_json(result: &SweepResult) -> Value {
    match result.optimal_row() {
        Some(row) => json!({
            "k": row.k,
            "s": row.s,
            "rate": row.rate,
            "strategy": row.strategy,
            "expected_time": row.value(),
            "ties": result.ties,
        }),
        None => Value::Null,
    }
}

pub fn run_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let scenario = args.scenario.scenario()?;
    let method = args.method.eval_method();
    let result = analysis::sweep(&scenario, args.scenario.n, method)?;
    require_all_rows(&result)?;
    print_notes(&scenario, &result, method);

    let mut out = sink(args.out.as_deref())?;
    match args.format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["k", "s", "rate", "expected_time", "method", "stderr", "is_optimal"])?;
            for (i, row) in result.rows.iter().enumerate() {
                let e = row.outcome.as_ref().expect("rows checked");
                w.write_record([
                    row.k.to_string(),
                    row.s.to_string(),
                    g17(row.rate),
                    g17(e.value),
                    e.method.to_string(),
                    opt_g17(e.stderr),
                    (result.optimal == Some(i)).to_string(),
                ])?;
            }
            w.flush()?;
        }
        TableFormat::Json => {
            let doc = json!({
                "config": config_json("sweep", &args.scenario, &args.method),
                "rows": result
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| row_json(r, result.optimal == Some(i)))
                    .collect::<Vec<_>>(),
                "optimal": optimal_json(&result),
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn threshold_formula(scaling: ScalingModel) -> &'static str {
    match scaling {
        ScalingModel::DataDependent => "(B-1)/(shift+B-1)",
        _ => "(B-1)/B",
    }
}

fn write_report_text(out: &mut dyn Write, report: &OptimalReport) -> std::io::Result<()> {
    writeln!(out, "scenario: {} n={}", report.scenario, report.n)?;
    match (report.best_k, report.strategy) {
        (Some(k), Some(label)) => {
            writeln!(out, "strategy: {label}")?;
            writeln!(out, "best k: {k} (s={}, rate={})", report.n / k, g17(k as f64 / report.n as f64))?;
        }
        _ => writeln!(out, "strategy: undetermined")?,
    }
    if let Some(row) = report.sweep.optimal_row() {
        let e = row.outcome.as_ref().expect("optimal row evaluated");
        write!(out, "expected time: {} ({})", g17(e.value), e.method)?;
        if let Some(se) = e.stderr {
            write!(out, " stderr {}", g17(se))?;
        }
        writeln!(out)?;
    }
    if let Some(k) = report.continuous_k {
        let rounded = format!("{k:.3}");
        writeln!(out, "continuous k*: {}", rounded.trim_end_matches('0').trim_end_matches('.'))?;
    }
    if let Some(t) = &report.threshold {
        let relation = if t.eps <= t.threshold { "<=" } else { ">" };
        writeln!(
            out,
            "threshold: eps = {} {relation} {} = {}; LLN regime {}",
            t.eps,
            threshold_formula(report.scenario.scaling),
            t.threshold,
            t.regime
        )?;
    }
    if report.ties.len() > 1 {
        let ks: Vec<String> = report.ties.iter().map(u32::to_string).collect();
        writeln!(out, "ties: {}", ks.join(","))?;
    }
    Ok(())
}

pub fn run_optimal(args: &OptimalArgs) -> Result<(), CliError> {
    let scenario = args.scenario.scenario()?;
    let method = args.method.eval_method();
    let report = optimal_report(&scenario, args.scenario.n, method)?;
    require_all_rows(&report.sweep)?;
    print_notes(&scenario, &report.sweep, method);

    let mut out = sink(args.out.as_deref())?;
    match args.format {
        ReportFormat::Text => write_report_text(&mut out, &report)?,
        ReportFormat::Json => {
            let sweep = &report.sweep;
            let doc = json!({
                "config": config_json("optimal", &args.scenario, &args.method),
                "rows": sweep
                    .rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| row_json(r, sweep.optimal == Some(i)))
                    .collect::<Vec<_>>(),
                "optimal": optimal_json(sweep),
                "continuous_k": report.continuous_k,
                "threshold": report.threshold,
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}
