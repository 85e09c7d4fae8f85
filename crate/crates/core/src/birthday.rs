//! Generalised birthday problem: the expected number of draws with
//! replacement from `n` coupons until some coupon has been drawn `d` times.
//!
//! Under additive scaling, replication over `n` workers finishes when the
//! first of `n` Erlang(n) task times does, which reduces to this quantity.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureResult, Tolerance};
use crate::special::ln_gamma;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Adaptive Gauss-Kronrod tolerance on `[0, T]`.
    pub tolerance: Tolerance,
    /// Neglected tail beyond `T`, relative to the lower bound `d` on the
    /// integral.
    pub tail_rel: f64,
    /// Reported error above this fraction of the value is a failure.
    pub target_rel: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            tolerance: Tolerance::default(),
            tail_rel: 1e-12,
            target_rel: 1e-8,
        }
    }
}

/// `ln Σ_{j<d} x^j / j!` with the largest term factored out.
fn ln_truncated_exp(x: f64, d: u32, ln_j: &[f64]) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_x = x.ln();
    let mut logs = Vec::with_capacity(d as usize);
    let mut lt = 0.0;
    let mut max = 0.0f64;
    logs.push(0.0);
    for lj in &ln_j[1..d as usize] {
        lt += ln_x - lj;
        max = max.max(lt);
        logs.push(lt);
    }
    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
}

/// `E(n, d)` with the default quadrature.
pub fn birthday_expectation(n: u32, d: u32) -> Result<f64> {
    birthday_expectation_with(n, d, &QuadratureSpec::default()).map(|r| r.value)
}

/// `E(n, d) = ∫_0^∞ e^{-t} S_d(t/n)^n dt` where `S_d` is the exponential
/// series truncated after `d` terms. The reported error includes the bound
/// on the neglected tail.
pub fn birthday_expectation_with(n: u32, d: u32, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    if n == 0 || d == 0 {
        return Err(Error::domain(format!("birthday expectation needs n, d >= 1, got n={n}, d={d}")));
    }
    let ln_j: Vec<f64> = (0..d.max(1) as usize)
        .map(|j| if j == 0 { 0.0 } else { (j as f64).ln() })
        .collect();
    let nf = n as f64;
    let ln_f = |t: f64| -t + nf * ln_truncated_exp(t / nf, d, &ln_j);
    let f = |t: f64| ln_f(t).exp();

    // For T > m = n(d-1): f(T+u) <= f(T) exp(-u (1 - m/T)), so the tail
    // beyond T is at most f(T) / (1 - m/T). This bound falls with T.
    let m = nf * (d - 1) as f64;
    let tail = |t: f64| ln_f(t).exp() / (1.0 - m / t);
    let budget = spec.tail_rel * d as f64;
    let nd = nf * d as f64;
    let mut hi = nd + 50.0 * nd.sqrt() + 50.0;
    while tail(hi) > budget {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::domain("truncation point for birthday integral diverged"));
        }
    }
    let mut lo = m.max(0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid > m && tail(mid) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-6 * hi {
            break;
        }
    }
    let cut = hi;
    let neglected = tail(cut);
    let body = integrate(f, 0.0, cut, spec.tolerance)?;
    let value = body.value + 0.5 * neglected;
    let error = body.error + 0.5 * neglected;
    let target = spec.target_rel * value.abs();
    if error > target {
        return Err(Error::QuadratureFailure {
            estimate: value,
            error,
            target,
        });
    }
    Ok(QuadratureResult {
        value,
        error,
        evaluations: body.evaluations,
    })
}

/// Fixed-`d`, large-`n` approximation `(d!)^{1/d} Γ(1+1/d) n^{1-1/d}`.
pub fn birthday_asymptotic(n: u32, d: u32) -> f64 {
    let d = d as f64;
    let inv = 1.0 / d;
    (ln_gamma(d + 1.0) * inv + ln_gamma(1.0 + inv) + (1.0 - inv) * (n as f64).ln()).exp()
}

/// Mean completion time of `n`-fold replication with additive scaling of
/// shifted-exponential units: `nΔ + (W/n) E(n, n)`.
pub fn replication_additive_sexp_mean(n: u32, delta: f64, w: f64) -> Result<f64> {
    let e = birthday_expectation(n, n)?;
    Ok(n as f64 * delta + w / n as f64 * e)
}

/// Large-`n` approximation of [`replication_additive_sexp_mean`], plugging
/// `d = n` into [`birthday_asymptotic`].
pub fn replication_additive_sexp_asymptotic(n: u32, delta: f64, w: f64) -> f64 {
    n as f64 * delta + w / n as f64 * birthday_asymptotic(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::ln_gamma as ln_gamma_oracle;

    /// Exact finite sum `E(n, d) = Σ_m m! [x^m] S_d(x/n)^n`: the m-th term is
    /// the probability that no coupon has reached `d` after `m` draws.
    fn birthday_by_counting(n: u32, d: u32) -> f64 {
        // Coefficients kept as logarithms; they fall below f64::MIN_POSITIVE
        // long before the last draw count.
        let base: Vec<f64> = (0..d)
            .map(|j| -(j as f64) * (n as f64).ln() - ln_gamma_oracle(j as f64 + 1.0))
            .collect();
        let mut poly = vec![0.0];
        for _ in 0..n {
            let mut next = vec![Vec::new(); poly.len() + base.len() - 1];
            for (i, a) in poly.iter().enumerate() {
                for (j, b) in base.iter().enumerate() {
                    next[i + j].push(a + b);
                }
            }
            poly = next
                .into_iter()
                .map(|logs: Vec<f64>| {
                    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln()
                })
                .collect();
        }
        poly.iter()
            .enumerate()
            .map(|(m, c)| (c + ln_gamma_oracle(m as f64 + 1.0)).exp())
            .sum()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn trivial_and_small_values() {
        assert!((birthday_expectation(5, 1).unwrap() - 1.0).abs() < 1e-10);
        assert!((birthday_expectation(1, 7).unwrap() - 7.0).abs() < 1e-10);
        assert!((birthday_expectation(2, 2).unwrap() - 2.5).abs() < 1e-10);
        assert!(birthday_expectation(0, 3).is_err());
        assert!(birthday_expectation(3, 0).is_err());
    }

    #[test]
    fn matches_exact_counting() {
        for n in 1..=15 {
            for d in 1..=15 {
                let got = birthday_expectation(n, d).unwrap();
                let want = birthday_by_counting(n, d);
                assert!(close(got, want, 1e-9), "n={n} d={d}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn high_precision_reference_values() {
        assert!(close(birthday_expectation(5, 3).unwrap(), 6.606_312_96, 1e-9));
        assert!(close(birthday_expectation(12, 12).unwrap(), 84.643_475_443_420_9, 1e-10));
        assert!(close(birthday_expectation(100, 100).unwrap(), 7_674.693_921_810_36, 1e-9));
        assert!(close(birthday_expectation(10_000, 2).unwrap(), 125.999_121_868_081, 1e-9));
    }

    #[test]
    fn asymptotic_examples() {
        for n in [1, 2, 17, 10_000] {
            assert!((birthday_asymptotic(n, 1) - 1.0).abs() < 1e-14);
        }
        let gamma_three_halves = 0.5 * std::f64::consts::PI.sqrt();
        assert!(close(birthday_asymptotic(2, 2), 2.0 * gamma_three_halves, 1e-13));
        let ratio = birthday_expectation(10_000, 2).unwrap() / birthday_asymptotic(10_000, 2);
        assert!((0.98..=1.02).contains(&ratio), "{ratio}");
    }

    #[test]
    fn replication_examples() {
        assert!((replication_additive_sexp_mean(1, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((replication_additive_sexp_mean(1, 3.0, 2.0).unwrap() - 5.0).abs() < 1e-10);
        assert!((replication_additive_sexp_asymptotic(1, 0.0, 1.0) - 1.0).abs() < 1e-14);
        let n = 12.0f64;
        let direct = 12.0
            + 5.0 / n
                * (ln_gamma_oracle(13.0) / n + ln_gamma_oracle(13.0 / 12.0) + (11.0 / 12.0) * n.ln()).exp();
        assert!(close(replication_additive_sexp_asymptotic(12, 1.0, 5.0), direct, 1e-13));
    }

    #[test]
    fn asymptotic_with_d_equal_n_is_not_uniform() {
        // The fixed-d approximation does not carry over to d = n: at n = 100
        // it undershoots the exact mean by more than half.
        let ratio = replication_additive_sexp_asymptotic(100, 0.0, 1.0)
            / replication_additive_sexp_mean(100, 0.0, 1.0).unwrap();
        assert!(close(ratio, 3_607.686_300_041_60 / 7_674.693_921_810_36, 1e-9), "{ratio}");
    }

    #[test]
    fn halving_tolerance_is_self_consistent() {
        for &(n, d) in &[(12, 12), (50, 3), (200, 200), (7, 40)] {
            let coarse = birthday_expectation_with(n, d, &QuadratureSpec::default()).unwrap();
            let mut fine_spec = QuadratureSpec::default();
            fine_spec.tolerance.rel *= 0.5;
            let fine = birthday_expectation_with(n, d, &fine_spec).unwrap();
            assert!(
                (coarse.value - fine.value).abs() <= coarse.error.max(4.0 * f64::EPSILON * coarse.value),
                "n={n} d={d}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pigeonhole_bounds(n in 1u32..=200, d in 1u32..=200) {
            let e = birthday_expectation(n, d).unwrap();
            let lo = d as f64;
            let hi = (n * (d - 1) + 1) as f64;
            prop_assert!(e >= lo * (1.0 - 1e-9) && e <= hi * (1.0 + 1e-9), "{}", e);
        }

        #[test]
        fn increasing_in_both_arguments(n in 1u32..=120, d in 2u32..=120) {
            let e = birthday_expectation(n, d).unwrap();
            prop_assert!(birthday_expectation(n, d + 1).unwrap() > e);
            prop_assert!(birthday_expectation(n + 1, d).unwrap() > e);
        }
    }
}
