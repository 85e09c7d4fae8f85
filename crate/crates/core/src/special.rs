//! Special functions and small numerical kernels shared by the closed forms.
//!
//! Everything here works in `f64`. Gamma and factorial ratios go through
//! [`ln_gamma`] so that arguments in the hundreds do not overflow.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 5.242_187_5; // 671/128
const LANCZOS_SERIES_0: f64 = 0.999_999_999_999_997_1;
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Natural log of the gamma function (14-term Lanczos series, g = 671/128).
///
/// Arguments below 0.5 go through the reflection formula. Returns NaN for
/// non-positive integers and `ln|Γ(x)|` elsewhere on the negative axis.
pub fn ln_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.5 {
        if x == x.floor() {
            return f64::NAN;
        }
        let s = (PI * x).sin().abs();
        return PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let tmp = x + LANCZOS_G;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut series = LANCZOS_SERIES_0;
    let mut y = x;
    for c in LANCZOS_COEFFS {
        y += 1.0;
        series += c / y;
    }
    tmp + (SQRT_2PI * series / x).ln()
}

/// Gamma function for positive arguments.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Binomial coefficient as a float, exact for results below 2^53.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// Harmonic numbers `H_0 .. H_max`, built once and then read-only.
#[derive(Debug, Clone)]
pub struct HarmonicTable {
    values: Vec<f64>,
}

impl HarmonicTable {
    pub fn new(max: usize) -> Self {
        let mut values = Vec::with_capacity(max + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for j in 1..=max {
            acc += 1.0 / j as f64;
            values.push(acc);
        }
        HarmonicTable { values }
    }

    pub fn max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> Option<f64> {
        self.values.get(j).copied()
    }

    /// `H_hi - H_lo`, summed directly over `1/(lo+1) .. 1/hi` from the
    /// smallest term up, so it keeps full relative accuracy when `hi - lo`
    /// is small.
    pub fn difference(hi: u64, lo: u64) -> f64 {
        debug_assert!(lo <= hi);
        (lo + 1..=hi).rev().map(|i| 1.0 / i as f64).sum()
    }
}

/// `H_n`.
pub fn harmonic(n: u64) -> f64 {
    HarmonicTable::difference(n, 0)
}

/// Probability mass function of Binomial(n, p), indices `0..=n`.
///
/// Built from the modal term outward with the ratio recurrence and then
/// normalised, so the result sums to one up to rounding even for n in the
/// thousands. Terms far in the tails underflow to zero.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let n_us = n as usize;
    let mut pmf = vec![0.0; n_us + 1];
    if p <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    if p >= 1.0 {
        pmf[n_us] = 1.0;
        return pmf;
    }
    let q = 1.0 - p;
    let mode = (((n as f64 + 1.0) * p).floor() as usize).min(n_us);
    // Seed the mode with 1.0; only ratios matter before normalisation.
    pmf[mode] = 1.0;
    let up = p / q;
    for i in mode..n_us {
        pmf[i + 1] = pmf[i] * (n_us - i) as f64 / (i + 1) as f64 * up;
    }
    let down = q / p;
    for i in (1..=mode).rev() {
        pmf[i - 1] = pmf[i] * i as f64 / (n_us - i + 1) as f64 * down;
    }
    let total = pairwise_sum(&pmf);
    for v in &mut pmf {
        *v /= total;
    }
    pmf
}

/// `P{Binomial(n, p) <= m}`.
pub fn binomial_cdf(n: u32, p: f64, m: u32) -> f64 {
    if m >= n {
        return 1.0;
    }
    let pmf = binomial_pmf(n, p);
    pairwise_sum(&pmf[..=m as usize]).min(1.0)
}

/// `P{Binomial(n, p) >= m}`.
pub fn binomial_sf(n: u32, p: f64, m: u32) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if m > n {
        return 0.0;
    }
    let pmf = binomial_pmf(n, p);
    pairwise_sum(&pmf[m as usize..]).min(1.0)
}

/// Pairwise (cascade) summation; error grows as O(log n) instead of O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut fact = 1.0f64;
        for n in 1..=30u64 {
            fact *= n as f64;
            let got = ln_gamma(n as f64 + 1.0);
            assert!((got - fact.ln()).abs() <= 1e-13 * fact.ln().max(1.0), "n={n}");
        }
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_agrees_with_statrs_on_validated_range() {
        let mut x = 0.1;
        while x <= 200.0 {
            let ours = ln_gamma(x);
            let theirs = statrs::function::gamma::ln_gamma(x);
            // Absolute error in ln Γ is relative error in Γ.
            assert!(
                (ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0),
                "x={x} ours={ours} statrs={theirs}"
            );
            x += 0.037;
        }
    }

    #[test]
    fn reflection_branch() {
        // Γ(-0.5) = -2 sqrt(pi)
        let expect = (2.0 * PI.sqrt()).ln();
        assert!((ln_gamma(-0.5) - expect).abs() < 1e-13);
        assert!(ln_gamma(0.0).is_nan());
        assert!(ln_gamma(-3.0).is_nan());
    }

    #[test]
    fn harmonic_table_spacings() {
        let t = HarmonicTable::new(100);
        assert_eq!(t.get(0), Some(0.0));
        for j in 1..=100 {
            let d = t.get(j).unwrap() - t.get(j - 1).unwrap();
            assert!((d - 1.0 / j as f64).abs() <= 4.0 * f64::EPSILON * t.get(j).unwrap());
        }
        assert!((harmonic(12) - 86021.0 / 27720.0).abs() < 1e-15);
        assert!((HarmonicTable::difference(12, 11) - 1.0 / 12.0).abs() < 1e-17);
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial(12, 6), 924.0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert!((ln_binomial(60, 30) - 118_264_581_564_861_424f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn binomial_pmf_matches_direct_formula() {
        for &(n, p) in &[(12u32, 0.3), (5, 0.5), (20, 0.995), (1, 0.2)] {
            let pmf = binomial_pmf(n, p);
            for (i, v) in pmf.iter().enumerate() {
                let direct = binomial(n as u64, i as u64)
                    * p.powi(i as i32)
                    * (1.0 - p).powi((n as usize - i) as i32);
                assert!((v - direct).abs() < 1e-15, "n={n} p={p} i={i}");
            }
        }
    }

    #[test]
    fn binomial_pmf_large_n_is_normalised() {
        let pmf = binomial_pmf(1500, 0.4);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-13);
        assert_eq!(binomial_pmf(7, 0.0)[0], 1.0);
        assert_eq!(binomial_pmf(7, 1.0)[7], 1.0);
        assert_eq!(binomial_cdf(7, 0.5, 7), 1.0);
        assert_eq!(binomial_sf(7, 0.5, 0), 1.0);
        assert_eq!(binomial_sf(7, 0.5, 8), 0.0);
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs = vec![0.1; 1_000_000];
        assert!((pairwise_sum(&xs) - 100_000.0).abs() < 1e-8);
    }
}
