//! Service-time distributions of a single computing unit.
//!
//! All three are sampled by inverse transform from one uniform on (0, 1],
//! so a stream of uniforms maps one-to-one onto draws.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One uniform on (0, 1]. Zero is excluded so `ln(u)` and `u^(-1/α)` stay
/// finite.
#[inline]
pub fn unit_open_closed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Δ + Exp(W): support `[Δ, ∞)`, a point mass at Δ when `W = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedExp {
    delta: f64,
    w: f64,
}

impl ShiftedExp {
    pub fn new(delta: f64, w: f64) -> Result<Self> {
        if !(delta.is_finite() && w.is_finite()) || delta < 0.0 || w < 0.0 {
            return Err(Error::invalid(format!(
                "shifted exponential needs finite delta >= 0 and W >= 0, got delta={delta}, W={w}"
            )));
        }
        if delta == 0.0 && w == 0.0 {
            return Err(Error::invalid("shifted exponential with delta = W = 0 is degenerate at zero"));
        }
        Ok(ShiftedExp { delta, w })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn w(&self) -> f64 {
        self.w
    }
}

/// Pareto(λ, α): `P{X > x} = (λ/x)^α` for `x > λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pareto {
    lambda: f64,
    alpha: f64,
}

impl Pareto {
    pub fn new(lambda: f64, alpha: f64) -> Result<Self> {
        if !(lambda.is_finite() && alpha.is_finite()) || lambda <= 0.0 || alpha <= 0.0 {
            return Err(Error::invalid(format!(
                "pareto needs finite lambda > 0 and alpha > 0, got lambda={lambda}, alpha={alpha}"
            )));
        }
        Ok(Pareto { lambda, alpha })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Raw moment `E[X^p] = αλ^p/(α-p)`, defined for `α > p`.
    pub fn raw_moment(&self, p: f64) -> Result<f64> {
        if self.alpha <= p {
            return Err(Error::MomentDoesNotExist {
                order: p,
                alpha: self.alpha,
            });
        }
        Ok(self.alpha * self.lambda.powf(p) / (self.alpha - p))
    }
}

/// Two-point straggler model: 1 with probability `1-ε`, `B` with probability `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiModal {
    b: f64,
    eps: f64,
}

impl BiModal {
    pub fn new(b: f64, eps: f64) -> Result<Self> {
        if !b.is_finite() || b <= 1.0 {
            return Err(Error::invalid(format!("bi-modal straggling magnitude must be > 1, got B={b}")));
        }
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::invalid(format!(
                "bi-modal straggling probability must be in [0, 1], got eps={eps}"
            )));
        }
        Ok(BiModal { b, eps })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServiceDistribution {
    ShiftedExp(ShiftedExp),
    Pareto(Pareto),
    BiModal(BiModal),
}

impl ServiceDistribution {
    pub fn shifted_exp(delta: f64, w: f64) -> Result<Self> {
        ShiftedExp::new(delta, w).map(Self::ShiftedExp)
    }

    pub fn pareto(lambda: f64, alpha: f64) -> Result<Self> {
        Pareto::new(lambda, alpha).map(Self::Pareto)
    }

    pub fn bimodal(b: f64, eps: f64) -> Result<Self> {
        BiModal::new(b, eps).map(Self::BiModal)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ShiftedExp(_) => "shifted-exponential",
            Self::Pareto(_) => "pareto",
            Self::BiModal(_) => "bi-modal",
        }
    }

    /// Inverse-transform map from a uniform on (0, 1] to a draw.
    #[inline]
    pub fn from_uniform(&self, u: f64) -> f64 {
        match *self {
            Self::ShiftedExp(d) => d.delta - d.w * u.ln(),
            Self::Pareto(d) => d.lambda * u.powf(-1.0 / d.alpha),
            Self::BiModal(d) => {
                if u <= d.eps {
                    d.b
                } else {
                    1.0
                }
            }
        }
    }

    /// One draw; consumes exactly one uniform.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_uniform(unit_open_closed(rng))
    }

    pub fn mean(&self) -> Result<f64> {
        match *self {
            Self::ShiftedExp(d) => Ok(d.delta + d.w),
            Self::Pareto(d) => d.raw_moment(1.0),
            Self::BiModal(d) => Ok(1.0 - d.eps + d.b * d.eps),
        }
    }

    /// Raw moment `E[X^p]` for a positive integer `p`.
    pub fn moment(&self, p: u32) -> Result<f64> {
        if p == 0 {
            return Err(Error::invalid("moment order must be positive"));
        }
        match *self {
            Self::ShiftedExp(d) => {
                // E[(Δ + W E)^p] with E ~ Exp(1): Σ C(p,j) Δ^(p-j) W^j j!
                let mut total = 0.0;
                let mut binom = 1.0;
                let mut fact = 1.0;
                for j in 0..=p {
                    if j > 0 {
                        binom = binom * (p - j + 1) as f64 / j as f64;
                        fact *= j as f64;
                    }
                    total += binom * d.delta.powi((p - j) as i32) * d.w.powi(j as i32) * fact;
                }
                Ok(total)
            }
            Self::Pareto(d) => d.raw_moment(p as f64),
            Self::BiModal(d) => Ok((1.0 - d.eps) + d.eps * d.b.powi(p as i32)),
        }
    }

    /// `P{X > x}`.
    pub fn tail(&self, x: f64) -> f64 {
        match *self {
            Self::ShiftedExp(d) => {
                if x < d.delta {
                    1.0
                } else if d.w == 0.0 {
                    0.0
                } else {
                    (-(x - d.delta) / d.w).exp()
                }
            }
            Self::Pareto(d) => {
                if x <= d.lambda {
                    1.0
                } else {
                    (d.lambda / x).powf(d.alpha)
                }
            }
            Self::BiModal(d) => {
                if x < 1.0 {
                    1.0
                } else if x < d.b {
                    d.eps
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest point of the support.
    pub fn minimum(&self) -> f64 {
        match *self {
            Self::ShiftedExp(d) => d.delta,
            Self::Pareto(d) => d.lambda,
            Self::BiModal(_) => 1.0,
        }
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ShiftedExp(d) => write!(f, "sexp:{},{}", d.delta, d.w),
            Self::Pareto(d) => write!(f, "pareto:{},{}", d.lambda, d.alpha),
            Self::BiModal(d) => write!(f, "bimodal:{},{}", d.b, d.eps),
        }
    }
}

/// Parses `sexp:DELTA,W`, `pareto:LAMBDA,ALPHA` or `bimodal:B,EPS`.
impl FromStr for ServiceDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected KIND:A,B, got '{s}'")))?;
        let (a, b) = params
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected two comma-separated parameters in '{s}'")))?;
        let num = |t: &str| -> Result<f64> {
            if t.is_empty() || t.contains(char::is_whitespace) {
                return Err(Error::Parse(format!("bad number '{t}' in '{s}'")));
            }
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{t}' in '{s}'")))
        };
        let (a, b) = (num(a)?, num(b)?);
        match kind {
            "sexp" => Self::shifted_exp(a, b),
            "pareto" => Self::pareto(a, b),
            "bimodal" => Self::bimodal(a, b),
            other => Err(Error::Parse(format!(
                "unknown distribution '{other}', expected sexp, pareto or bimodal"
            ))),
        }
    }
}
