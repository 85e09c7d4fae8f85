//! Expected `k`-th smallest of `n` i.i.d. variables for the laws that arise
//! under the three scaling models.

use crate::error::{Error, Result};
use crate::special::{binomial_cdf, binomial_pmf, binomial_sf, ln_gamma, pairwise_sum, HarmonicTable};

/// Largest tolerated ratio of the absolute sum of the alternating terms to
/// the result in [`erlang_order_mean`]. Beyond it fewer than about ten
/// significant digits survive in double precision.
pub const ERLANG_CONDITION_LIMIT: f64 = 1e6;

fn check_rank(n: u32, k: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    if k == 0 || k > n {
        return Err(Error::domain(format!("order k = {k} outside 1..={n}")));
    }
    Ok(())
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

/// `E[X_{k:n}]` for `X ~ Exp(W)`: `W (H_n - H_{n-k})`.
pub fn exp_order_mean(n: u32, k: u32, w: f64) -> Result<f64> {
    check_rank(n, k)?;
    check_scale("W", w)?;
    Ok(w * HarmonicTable::difference(n as u64, (n - k) as u64))
}

/// Coefficients of `(Σ_{l<x} t^l / l!)^y`.
fn truncated_exp_power(x: u32, y: u32) -> Vec<f64> {
    let base: Vec<f64> = {
        let mut c = Vec::with_capacity(x as usize);
        let mut f = 1.0;
        for l in 0..x {
            if l > 0 {
                f /= l as f64;
            }
            c.push(f);
        }
        c
    };
    let mut acc = vec![1.0];
    for _ in 0..y {
        let mut next = vec![0.0; acc.len() + base.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in base.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc
}

/// `E[X_{k:n}]` for `X ~ Erlang(s, W)`, by the alternating gamma order
/// statistic formula.
///
/// Fails with [`Error::Overflow`] when cancellation between the alternating
/// terms would leave fewer than about ten correct digits.
pub fn erlang_order_mean(n: u32, k: u32, s: u32, w: f64) -> Result<f64> {
    check_rank(n, k)?;
    check_scale("W", w)?;
    if s == 0 {
        return Err(Error::invalid("Erlang shape s must be at least 1"));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    let ln_pref = (k as f64).ln() - ln_gamma(s as f64) + ln_gamma(n as f64 + 1.0)
        - ln_gamma(k as f64 + 1.0)
        - ln_gamma((n - k) as f64 + 1.0);
    let mut terms = Vec::with_capacity(k as usize);
    for i in 0..k {
        let y = n - k + i;
        let m = (y + 1) as f64;
        let ln_m = m.ln();
        let alphas = truncated_exp_power(s, y);
        let inner: Vec<f64> = alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| **a > 0.0)
            .map(|(j, a)| {
                let e = (s as usize + j) as f64;
                (a.ln() + ln_gamma(e + 1.0) - (e + 1.0) * ln_m).exp()
            })
            .collect();
        let ln_c = ln_gamma(k as f64) - ln_gamma(i as f64 + 1.0) - ln_gamma((k - i) as f64);
        let magnitude = (ln_pref + ln_c).exp() * pairwise_sum(&inner);
        terms.push(if i % 2 == 0 { magnitude } else { -magnitude });
    }
    let value = pairwise_sum(&terms);
    let absolute: f64 = terms.iter().map(|t| t.abs()).sum();
    let kappa = absolute / value.abs();
    if !value.is_finite() || !kappa.is_finite() || value <= 0.0 || kappa > ERLANG_CONDITION_LIMIT {
        return Err(Error::Overflow {
            n,
            s,
            reason: format!("alternating sum condition number {kappa:.3e} exceeds {ERLANG_CONDITION_LIMIT:e}"),
        });
    }
    Ok(w * value)
}

/// `E[X_{k:n}]` for `X ~ Pareto(λ, α)`:
/// `λ · n!/(n-k)! · Γ(n-k+1-1/α)/Γ(n+1-1/α)`, evaluated in log space.
pub fn pareto_order_mean(n: u32, k: u32, lambda: f64, alpha: f64) -> Result<f64> {
    check_rank(n, k)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(Error::MomentDoesNotExist { order: 1.0, alpha });
    }
    let n = n as f64;
    let nk = n - k as f64;
    let inv = 1.0 / alpha;
    let ln_ratio = ln_gamma(n + 1.0) - ln_gamma(nk + 1.0) + ln_gamma(nk + 1.0 - inv) - ln_gamma(n + 1.0 - inv);
    Ok(lambda * ln_ratio.exp())
}

/// Large-`x` approximation `Γ(x+β)/Γ(x+α) ≈ x^(β-α)`.
pub fn gamma_ratio_approx(x: f64, beta: f64, alpha: f64) -> f64 {
    x.powf(beta - alpha)
}

/// `E[X_{k:n}]` for the bi-modal law on `{1, B}`: `1 + (B-1) P{fewer than k
/// of n draws are fast}`.
pub fn bimodal_order_mean(n: u32, k: u32, b: f64, eps: f64) -> Result<f64> {
    check_rank(n, k)?;
    check_bimodal(b, eps)?;
    Ok(1.0 + (b - 1.0) * binomial_cdf(n, 1.0 - eps, k - 1))
}

fn check_bimodal(b: f64, eps: f64) -> Result<()> {
    if !(b.is_finite() && b > 1.0) {
        return Err(Error::invalid(format!("B must be > 1, got {b}")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("eps must be in [0, 1], got {eps}")));
    }
    Ok(())
}

/// Distribution of the straggler count of `Y_{k:n}` when each task is the
/// sum of `s` bi-modal units: entry `w` is the probability that the `k`-th
/// fastest task contains exactly `w` slow units, so that `Y_{k:n} = s +
/// w(B-1)`.
pub fn bimodal_sum_order_pmf(n: u32, k: u32, s: u32, eps: f64) -> Result<Vec<f64>> {
    check_rank(n, k)?;
    if s == 0 {
        return Err(Error::invalid("task size s must be at least 1"));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("eps must be in [0, 1], got {eps}")));
    }
    let p = binomial_pmf(s, eps);
    let su = s as usize;
    // below[w] = Σ_{j<w} p_j, above[w] = Σ_{h>w} p_h, both summed directly.
    let mut below = vec![0.0; su + 1];
    for w in 1..=su {
        below[w] = below[w - 1] + p[w - 1];
    }
    let mut above = vec![0.0; su + 1];
    for w in (0..su).rev() {
        above[w] = above[w + 1] + p[w + 1];
    }
    let mut pmf = Vec::with_capacity(su + 1);
    for w in 0..=su {
        let rest = p[w] + above[w];
        if rest <= 0.0 {
            pmf.push(0.0);
            continue;
        }
        let lower = binomial_pmf(n, below[w]);
        let cond = p[w] / rest;
        let terms: Vec<f64> = (0..k)
            .map(|i| {
                if lower[i as usize] == 0.0 {
                    0.0
                } else {
                    lower[i as usize] * binomial_sf(n - i, cond.min(1.0), k - i)
                }
            })
            .collect();
        pmf.push(pairwise_sum(&terms));
    }
    let total = pairwise_sum(&pmf);
    if !total.is_finite() || (total - 1.0).abs() > 1e-9 {
        return Err(Error::Overflow {
            n,
            s,
            reason: format!("order statistic pmf sums to {total}"),
        });
    }
    Ok(pmf)
}

/// `E[Y_{k:n}]` where each `Y` is the sum of `s` i.i.d. bi-modal units.
pub fn bimodal_sum_order_mean(n: u32, k: u32, s: u32, b: f64, eps: f64) -> Result<f64> {
    check_bimodal(b, eps)?;
    let pmf = bimodal_sum_order_pmf(n, k, s, eps)?;
    let slow: Vec<f64> = pmf.iter().enumerate().map(|(w, p)| w as f64 * p).collect();
    Ok(s as f64 + (b - 1.0) * pairwise_sum(&slow))
}
