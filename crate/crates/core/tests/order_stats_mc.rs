//! Closed-form order statistics against brute-force simulation with an
//! independent generator and sampler.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use redundancy_core::birthday::replication_additive_sexp_mean;
use redundancy_core::order_stats::{
    bimodal_order_mean, bimodal_sum_order_mean, erlang_order_mean, exp_order_mean, pareto_order_mean,
};

const TRIALS: usize = 1_000_000;

/// Mean and standard error of the `k`-th smallest of `n` draws.
fn simulate<F: FnMut(&mut StdRng) -> f64>(n: usize, k: usize, seed: u64, mut draw: F) -> (f64, f64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut buf = vec![0.0; n];
    let (mut sum, mut sq) = (0.0f64, 0.0f64);
    for _ in 0..TRIALS {
        for slot in buf.iter_mut() {
            *slot = draw(&mut rng);
        }
        buf.sort_by(f64::total_cmp);
        let y = buf[k - 1];
        sum += y;
        sq += y * y;
    }
    let m = sum / TRIALS as f64;
    let var = (sq / TRIALS as f64 - m * m) * TRIALS as f64 / (TRIALS - 1) as f64;
    (m, (var / TRIALS as f64).sqrt())
}

fn exp_draw(rng: &mut StdRng, w: f64) -> f64 {
    // Open interval (0, 1) via rejection of the endpoint.
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    -w * u.ln()
}

fn assert_within(label: &str, exact: f64, (m, se): (f64, f64), sigmas: f64) {
    assert!(
        (m - exact).abs() <= sigmas * se,
        "{label}: exact {exact}, simulated {m} ± {se}"
    );
}

#[test]
fn exponential_order_statistic() {
    let exact = exp_order_mean(12, 5, 2.0).unwrap();
    assert_within("exp", exact, simulate(12, 5, 1, |r| exp_draw(r, 2.0)), 4.0);
}

#[test]
fn erlang_order_statistic() {
    let exact = erlang_order_mean(12, 4, 3, 1.0).unwrap();
    let sim = simulate(12, 4, 2, |r| (0..3).map(|_| exp_draw(r, 1.0)).sum());
    assert_within("erlang", exact, sim, 4.0);
}

#[test]
fn pareto_order_statistic() {
    // Maximum of twelve Pareto(1, 5).
    let exact = pareto_order_mean(12, 12, 1.0, 5.0).unwrap();
    let sim = simulate(12, 12, 3, |r| {
        let u: f64 = r.gen_range(f64::EPSILON..1.0);
        u.powf(-1.0 / 5.0)
    });
    assert_within("pareto max", exact, sim, 3.0);
    let exact = pareto_order_mean(12, 7, 2.0, 3.0).unwrap();
    let sim = simulate(12, 7, 4, |r| {
        let u: f64 = r.gen_range(f64::EPSILON..1.0);
        2.0 * u.powf(-1.0 / 3.0)
    });
    assert_within("pareto", exact, sim, 4.0);
}

#[test]
fn bimodal_order_statistics() {
    let exact = bimodal_order_mean(12, 9, 10.0, 0.3).unwrap();
    let sim = simulate(12, 9, 5, |r| if r.gen_bool(0.3) { 10.0 } else { 1.0 });
    assert_within("bimodal", exact, sim, 4.0);
    let exact = bimodal_sum_order_mean(12, 4, 3, 10.0, 0.4).unwrap();
    let sim = simulate(12, 4, 6, |r| (0..3).map(|_| if r.gen_bool(0.4) { 10.0 } else { 1.0 }).sum());
    assert_within("bimodal sum", exact, sim, 4.0);
}

#[test]
fn replication_under_additive_scaling() {
    // Fastest of twelve workers, each summing twelve Exp(1) units.
    let exact = replication_additive_sexp_mean(12, 0.0, 1.0).unwrap();
    let sim = simulate(12, 1, 7, |r| (0..12).map(|_| exp_draw(r, 1.0)).sum());
    assert_within("replication", exact, sim, 3.0);
}
