//! Globally adaptive Gauss-Kronrod (7/15 point) integration on a finite
//! interval.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::special::pairwise_sum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-11,
            abs: 0.0,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Sum over subintervals of |K15 - G7|.
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate falls below
/// `max(tol.abs, tol.rel * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::domain(format!("bad integration range [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut evaluations = 15;
    heap.push(first);

    loop {
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureFailure {
                estimate: value,
                error,
                target,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be split in floating point.
            return Err(Error::QuadratureFailure {
                estimate: value,
                error,
                target,
            });
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift from the running updates.
    let segments = heap.into_vec();
    let values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    let errors: Vec<f64> = segments.iter().map(|s| s.error).collect();
    Ok(QuadratureResult {
        value: pairwise_sum(&values),
        error: pairwise_sum(&errors),
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, Tolerance::default()).unwrap();
        // [x^6/6 - x^3 + x] from -1 to 2
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn exponential_decay() {
        let r = integrate(|t: f64| (-t).exp(), 0.0, 60.0, Tolerance::default()).unwrap();
        assert!((r.value - (1.0 - (-60.0f64).exp())).abs() < 1e-12);
        assert!(r.error < 1e-10);
    }

    #[test]
    fn peaked_integrand_refines() {
        let r = integrate(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn gives_up_when_budget_exhausted() {
        let tol = Tolerance {
            rel: 1e-15,
            abs: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| x.abs().sqrt().sin(), -3.0, 7.0, tol).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn rejects_bad_range() {
        assert!(integrate(|x| x, 1.0, 0.0, Tolerance::default()).is_err());
        assert_eq!(integrate(|x| x, 1.0, 1.0, Tolerance::default()).unwrap().value, 0.0);
    }
}
