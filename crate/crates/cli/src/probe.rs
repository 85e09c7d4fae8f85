use redundancy_core::analysis::{self, SweepRow, TIE_REL};
use redundancy_core::{EvalMethod, ScalingModel, Scenario, ServiceDistribution};

use crate::args::{Conjecture, Grid, ProbeArgs};
use crate::output::g17;
use crate::CliError;

/// What the conjecture predicts at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Claim {
    ReplicationOptimal,
    ReplicationBeaten,
}

struct Point {
    label: String,
    dist: ServiceDistribution,
}

fn axis<'a>(grid: &'a Option<Grid>, fallback: f64) -> std::borrow::Cow<'a, [f64]> {
    match grid {
        Some(g) => std::borrow::Cow::Borrowed(&g.0),
        None => std::borrow::Cow::Owned(vec![fallback]),
    }
}

fn grid_points(args: &ProbeArgs, base: ServiceDistribution) -> Result<(Vec<Point>, usize), CliError> {
    let stray = |flags: &[(&str, bool)]| -> Result<(), CliError> {
        match flags.iter().find(|(_, set)| *set) {
            Some((name, _)) => Err(CliError::usage(format!("--{name} does not apply to {}", base.name()))),
            None => Ok(()),
        }
    };
    let mut points = Vec::new();
    let mut invalid = 0;
    let mut push = |label: String, d: redundancy_core::Result<ServiceDistribution>| match d {
        Ok(dist) => points.push(Point { label, dist }),
        Err(_) => invalid += 1,
    };
    match base {
        ServiceDistribution::ShiftedExp(d) => {
            stray(&[
                ("lambda-grid", args.lambda_grid.is_some()),
                ("alpha-grid", args.alpha_grid.is_some()),
                ("b-grid", args.b_grid.is_some()),
                ("eps-grid", args.eps_grid.is_some()),
            ])?;
            for &delta in axis(&args.delta_grid, d.delta()).iter() {
                for &w in axis(&args.w_grid, d.w()).iter() {
                    push(format!("delta={delta} W={w}"), ServiceDistribution::shifted_exp(delta, w));
                }
            }
        }
        ServiceDistribution::Pareto(p) => {
            stray(&[
                ("delta-grid", args.delta_grid.is_some()),
                ("w-grid", args.w_grid.is_some()),
                ("b-grid", args.b_grid.is_some()),
                ("eps-grid", args.eps_grid.is_some()),
            ])?;
            for &lambda in axis(&args.lambda_grid, p.lambda()).iter() {
                for &alpha in axis(&args.alpha_grid, p.alpha()).iter() {
                    push(format!("lambda={lambda} alpha={alpha}"), ServiceDistribution::pareto(lambda, alpha));
                }
            }
        }
        ServiceDistribution::BiModal(b) => {
            stray(&[
                ("delta-grid", args.delta_grid.is_some()),
                ("w-grid", args.w_grid.is_some()),
                ("lambda-grid", args.lambda_grid.is_some()),
                ("alpha-grid", args.alpha_grid.is_some()),
            ])?;
            for &bb in axis(&args.b_grid, b.b()).iter() {
                for &eps in axis(&args.eps_grid, b.eps()).iter() {
                    push(format!("B={bb} eps={eps}"), ServiceDistribution::bimodal(bb, eps));
                }
            }
        }
    }
    Ok((points, invalid))
}

fn default_dist(c: Conjecture) -> &'static str {
    match c {
        Conjecture::C1 => "bimodal:10,0.2",
        Conjecture::C2 => "bimodal:10,0.4",
        Conjecture::C3 => "sexp:0,1",
    }
}

/// Under server scaling only the random factor of a shifted exponential is
/// multiplied by `s`, so its scaled part has no constant component.
fn claim(c: Conjecture, dist: &ServiceDistribution) -> Claim {
    match (c, dist) {
        (Conjecture::C1, ServiceDistribution::ShiftedExp(_)) => Claim::ReplicationOptimal,
        _ => Claim::ReplicationBeaten,
    }
}

struct Finding {
    k: u32,
    value: f64,
    margin: f64,
}

/// A counterexample candidate at one point, if the predicted ordering fails
/// by more than four combined standard errors.
fn check(rows: &[SweepRow], claim: Claim) -> Option<(f64, Finding)> {
    let value = |r: &SweepRow| r.outcome.as_ref().map(|e| (e.value, e.stderr.unwrap_or(0.0))).ok();
    let (v1, se1) = value(rows.first()?)?;
    let others: Vec<(u32, f64, f64)> = rows[1..]
        .iter()
        .filter_map(|r| value(r).map(|(v, se)| (r.k, v, se)))
        .collect();
    if others.is_empty() {
        return None;
    }
    let slack = |se: f64| 4.0 * (se1 * se1 + se * se).sqrt() + TIE_REL * v1.abs();
    match claim {
        Claim::ReplicationBeaten => {
            let all_lose = others.iter().all(|&(_, v, se)| v - v1 > slack(se));
            let &(k, v, _) = others.iter().min_by(|a, b| a.1.total_cmp(&b.1))?;
            all_lose.then_some((v1, Finding { k, value: v, margin: v - v1 }))
        }
        Claim::ReplicationOptimal => others
            .iter()
            .filter(|&&(_, v, se)| v1 - v > slack(se))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|&(k, v, _)| (v1, Finding { k, value: v, margin: v - v1 })),
    }
}

pub fn run_probe(args: &ProbeArgs) -> Result<(), CliError> {
    let c = args.conjecture;
    let base = match args.dist {
        Some(d) => d,
        None => default_dist(c).parse().expect("default distribution parses"),
    };
    let scaling = match c {
        Conjecture::C1 => ScalingModel::ServerDependent,
        Conjecture::C2 | Conjecture::C3 => ScalingModel::Additive,
    };
    if c == Conjecture::C2 && !matches!(base, ServiceDistribution::BiModal(_)) {
        return Err(CliError::usage("probe c2 concerns bimodal units; pass --dist bimodal:B,EPS"));
    }
    let tag = format!("{c:?}").to_lowercase();
    let n = args.n;
    if n < 2 {
        println!("probe {tag}: n={n} has no k >= 2 to compare");
        return Ok(());
    }
    let (points, invalid) = grid_points(args, base)?;
    let mut skipped = invalid;
    let method = EvalMethod::Auto {
        trials: args.mc.trials,
        seed: args.mc.seed,
    };
    let mut found = Vec::new();
    for p in &points {
        let scenario = match Scenario::new(p.dist, scaling, None) {
            Ok(s) => s,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let result = match analysis::sweep(&scenario, n, method) {
            Ok(r) if r.rows.iter().all(|row| row.outcome.is_ok()) => r,
            _ => {
                skipped += 1;
                continue;
            }
        };
        let predicted = claim(c, &p.dist);
        if let Some((v1, f)) = check(&result.rows, predicted) {
            found.push((p.label.clone(), predicted, v1, f));
        }
    }
    let mut summary = format!(
        "probe {tag}: {scaling} scaling, n={n}, {} grid point(s), {} counterexample candidate(s)",
        points.len() + invalid,
        found.len()
    );
    if skipped > 0 {
        summary.push_str(&format!(", {skipped} skipped (invalid or not evaluable)"));
    }
    println!("{summary}");
    for (label, predicted, v1, f) in found {
        let expectation = match predicted {
            Claim::ReplicationOptimal => "replication expected optimal",
            Claim::ReplicationBeaten => "some k >= 2 expected to beat replication",
        };
        println!(
            "  {label}: {expectation}; k=1 gives {}, k={} gives {} (difference {})",
            g17(v1),
            f.k,
            g17(f.value),
            g17(f.margin)
        );
    }
    Ok(())
}
