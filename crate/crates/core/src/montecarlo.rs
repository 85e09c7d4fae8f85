//! Seeded Monte Carlo estimation of `E[Y_{k:n}]`.
//!
//! Trial `i` draws from its own ChaCha8 stream selected by `i`, so the
//! estimate depends only on the inputs and the seed, never on how trials
//! are spread over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{JobConfig, Scenario};
use crate::distributions::ServiceDistribution;
use crate::error::{Error, Result};
use crate::scaling::TaskModel;
use crate::special::pairwise_sum;

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 0x0005_eed0_2017_1231;
pub const MIN_TRIALS: u64 = 100;

/// Maps a trial index to its random stream.
#[derive(Debug, Clone)]
pub struct TrialPlan {
    seed: u64,
    base: ChaCha8Rng,
}

impl TrialPlan {
    pub fn new(seed: u64) -> Self {
        TrialPlan {
            seed,
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream for trial `i`: same key as the base, stream number `i`.
    pub fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(trial);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
    pub median: f64,
    /// Set when the per-unit variance is infinite, in which case `stderr`
    /// understates the spread and `median` is the robust summary.
    pub heavy_tail: bool,
}

fn one_trial(task: &TaskModel, job: JobConfig, rng: &mut ChaCha8Rng, buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    buf.extend((0..job.n()).map(|_| task.sample_task_time(rng)));
    let idx = job.k() as usize - 1;
    let (_, kth, _) = buf.select_nth_unstable_by(idx, f64::total_cmp);
    *kth
}

/// Completion times of `trials` independent runs, in trial order.
pub fn sample_completion_times(scenario: &Scenario, n: u32, k: u32, trials: u64, seed: u64) -> Result<Vec<f64>> {
    let job = JobConfig::new(n, k)?;
    let task = TaskModel::new(scenario.dist, scenario.scaling, scenario.shift, job.s())?;
    let plan = TrialPlan::new(seed);
    Ok((0..trials)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n as usize),
            |buf, i| one_trial(&task, job, &mut plan.stream(i), buf),
        )
        .collect())
}

pub fn estimate(scenario: &Scenario, n: u32, k: u32, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid(format!("at least {MIN_TRIALS} trials are required, got {trials}")));
    }
    let mut ys = sample_completion_times(scenario, n, k, trials, seed)?;
    let count = trials as f64;
    let mean = pairwise_sum(&ys) / count;
    let squares: Vec<f64> = ys.iter().map(|y| (y - mean) * (y - mean)).collect();
    let variance = pairwise_sum(&squares) / (count - 1.0);
    ys.sort_unstable_by(f64::total_cmp);
    let mid = ys.len() / 2;
    let median = if ys.len() % 2 == 0 {
        0.5 * (ys[mid - 1] + ys[mid])
    } else {
        ys[mid]
    };
    let heavy_tail = matches!(scenario.dist, ServiceDistribution::Pareto(p) if p.alpha() <= 2.0);
    Ok(McEstimate {
        mean,
        stderr: (variance / count).sqrt(),
        trials,
        seed,
        median,
        heavy_tail,
    })
}

/// One side of a dominance comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub scenario: Scenario,
    pub n: u32,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailPoint {
    pub x: f64,
    pub tail_a: f64,
    pub tail_b: f64,
    /// Three standard deviations of `tail_a - tail_b`.
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub points: Vec<TailPoint>,
    /// Largest `tail_a - tail_b` over the grid, zero when never positive.
    pub max_violation: f64,
    /// Largest `tail_a - tail_b - band`, zero when never positive.
    pub max_excess: f64,
    pub violated: bool,
}

/// Checks `P_A{Y > x} <= P_B{Y > x}` on `grid`, both sides driven by the
/// same seed.
pub fn empirical_cdf_compare(a: &Config, b: &Config, trials: u64, seed: u64, grid: &[f64]) -> Result<DominanceReport> {
    if trials < MIN_TRIALS {
        return Err(Error::invalid(format!("at least {MIN_TRIALS} trials are required, got {trials}")));
    }
    let mut ya = sample_completion_times(&a.scenario, a.n, a.k, trials, seed)?;
    let mut yb = sample_completion_times(&b.scenario, b.n, b.k, trials, seed)?;
    ya.sort_unstable_by(f64::total_cmp);
    yb.sort_unstable_by(f64::total_cmp);
    let count = trials as f64;
    let tail = |ys: &[f64], x: f64| (ys.len() - ys.partition_point(|&y| y <= x)) as f64 / count;
    let mut max_violation = 0.0f64;
    let mut max_excess = 0.0f64;
    let points = grid
        .iter()
        .map(|&x| {
            let pa = tail(&ya, x);
            let pb = tail(&yb, x);
            let band = 3.0 * ((pa * (1.0 - pa) + pb * (1.0 - pb)) / count).sqrt();
            max_violation = max_violation.max(pa - pb);
            max_excess = max_excess.max(pa - pb - band);
            TailPoint {
                x,
                tail_a: pa,
                tail_b: pb,
                band,
            }
        })
        .collect();
    Ok(DominanceReport {
        points,
        max_violation,
        max_excess,
        violated: max_excess > 0.0,
    })
}
