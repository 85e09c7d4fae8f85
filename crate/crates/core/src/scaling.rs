//! Task service time as a function of the number of computing units per task.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{unit_open_closed, ServiceDistribution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingModel {
    /// `Y = Δ + s·X` (shifted exponential) or `Y = s·X`.
    ServerDependent,
    /// `Y = s·Δ + X`.
    DataDependent,
    /// `Y = X_1 + ... + X_s`.
    Additive,
}

impl ScalingModel {
    pub const ALL: [ScalingModel; 3] = [Self::ServerDependent, Self::DataDependent, Self::Additive];

    pub fn token(&self) -> &'static str {
        match self {
            Self::ServerDependent => "server",
            Self::DataDependent => "data",
            Self::Additive => "additive",
        }
    }

    /// Whether this model needs an external shift for `dist`.
    pub fn needs_shift(&self, dist: &ServiceDistribution) -> bool {
        *self == Self::DataDependent && !matches!(dist, ServiceDistribution::ShiftedExp(_))
    }
}

impl fmt::Display for ScalingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ScalingModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "server" => Ok(Self::ServerDependent),
            "data" => Ok(Self::DataDependent),
            "additive" => Ok(Self::Additive),
            other => Err(Error::Parse(format!(
                "unknown scaling '{other}', expected server, data or additive"
            ))),
        }
    }
}

/// Checks the shift rule: required for data-dependent Pareto and bi-modal,
/// forbidden everywhere else. Returns the effective shift.
pub fn validate_shift(dist: &ServiceDistribution, scaling: ScalingModel, shift: Option<f64>) -> Result<f64> {
    match (scaling.needs_shift(dist), shift) {
        (true, Some(d)) if d.is_finite() && d >= 0.0 => Ok(d),
        (true, Some(d)) => Err(Error::invalid(format!("shift must be finite and >= 0, got {d}"))),
        (true, None) => Err(Error::invalid(format!(
            "data-dependent scaling of a {} distribution requires a shift",
            dist.name()
        ))),
        (false, Some(_)) => Err(Error::invalid(format!(
            "a shift is only accepted for data-dependent scaling of pareto or bi-modal, not {} with {} scaling",
            dist.name(),
            scaling
        ))),
        (false, None) => Ok(match (scaling, dist) {
            (ScalingModel::DataDependent, ServiceDistribution::ShiftedExp(d)) => d.delta(),
            _ => 0.0,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskModel {
    dist: ServiceDistribution,
    scaling: ScalingModel,
    shift: Option<f64>,
    s: u32,
}

impl TaskModel {
    pub fn new(dist: ServiceDistribution, scaling: ScalingModel, shift: Option<f64>, s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("task size s must be at least 1"));
        }
        validate_shift(&dist, scaling, shift)?;
        Ok(TaskModel {
            dist,
            scaling,
            shift,
            s,
        })
    }

    pub fn dist(&self) -> &ServiceDistribution {
        &self.dist
    }

    pub fn scaling(&self) -> ScalingModel {
        self.scaling
    }

    pub fn shift(&self) -> Option<f64> {
        self.shift
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    /// Number of uniforms one task draw consumes.
    pub fn uniforms_per_task(&self) -> u32 {
        match self.scaling {
            ScalingModel::Additive => self.s,
            _ => 1,
        }
    }

    /// One realisation of the task time.
    #[inline]
    pub fn sample_task_time<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.s as f64;
        match (self.scaling, self.dist) {
            (ScalingModel::ServerDependent, ServiceDistribution::ShiftedExp(d)) => {
                d.delta() - s * d.w() * unit_open_closed(rng).ln()
            }
            (ScalingModel::ServerDependent, dist) => s * dist.sample(rng),
            (ScalingModel::DataDependent, ServiceDistribution::ShiftedExp(d)) => {
                s * d.delta() - d.w() * unit_open_closed(rng).ln()
            }
            (ScalingModel::DataDependent, dist) => s * self.shift.unwrap_or(0.0) + dist.sample(rng),
            (ScalingModel::Additive, dist) => (0..self.s).map(|_| dist.sample(rng)).sum(),
        }
    }

    /// `E[Y]`.
    pub fn mean(&self) -> Result<f64> {
        let s = self.s as f64;
        let ex = self.dist.mean()?;
        Ok(match (self.scaling, self.dist) {
            (ScalingModel::ServerDependent, ServiceDistribution::ShiftedExp(d)) => d.delta() + s * d.w(),
            (ScalingModel::ServerDependent, _) => s * ex,
            (ScalingModel::DataDependent, ServiceDistribution::ShiftedExp(d)) => s * d.delta() + d.w(),
            (ScalingModel::DataDependent, _) => s * self.shift.unwrap_or(0.0) + ex,
            (ScalingModel::Additive, _) => s * ex,
        })
    }
}
