use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

fn sum_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(y, f)| (y - f).powi(2)).sum()
}

/// `(1/n)·√Σ(Y − Ŷ)²`, the error measure exactly as the reflectometry
/// literature this tool follows writes it.
pub fn rmse(measured: &[f64], modelled: &[f64]) -> Result<f64> {
    check_lengths(measured, modelled)?;
    Ok(sum_sq_diff(measured, modelled).sqrt() / measured.len() as f64)
}

/// Conventional root-mean-square error `√(Σ(Y − Ŷ)² / n)`.
pub fn rmse_standard(measured: &[f64], modelled: &[f64]) -> Result<f64> {
    check_lengths(measured, modelled)?;
    Ok((sum_sq_diff(measured, modelled) / measured.len() as f64).sqrt())
}

/// Coefficient of determination `1 − SSR/SST`; can be negative.
pub fn r_squared(measured: &[f64], fitted: &[f64]) -> Result<f64> {
    check_lengths(measured, fitted)?;
    let mean = measured.iter().sum::<f64>() / measured.len() as f64;
    let sst: f64 = measured.iter().map(|y| (y - mean).powi(2)).sum();
    if sst <= 0.0 {
        return Err(Error::UndefinedRSquared);
    }
    Ok(1.0 - sum_sq_diff(measured, fitted) / sst)
}

/// Which RMSE formula feeds the quality gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RmseKind {
    /// `(1/n)·√Σ(Y − Ŷ)²`
    Printed,
    /// `√(Σ(Y − Ŷ)²/n)`
    #[default]
    Standard,
}

impl RmseKind {
    pub fn evaluate(self, measured: &[f64], modelled: &[f64]) -> Result<f64> {
        match self {
            RmseKind::Printed => rmse(measured, modelled),
            RmseKind::Standard => rmse_standard(measured, modelled),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Pass,
    Fail,
}

impl Gate {
    pub fn passed(self) -> bool {
        self == Gate::Pass
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gate::Pass => "pass",
            Gate::Fail => "fail",
        }
    }
}

/// Per-sensor acceptance: `rmse < rmse_max` and `r2 > r2_min`, both strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GateThresholds {
    pub rmse_max: f64,
    pub r2_min: f64,
}

impl Default for GateThresholds {
    fn default() -> Self {
        Self {
            rmse_max: 0.04,
            r2_min: 0.7,
        }
    }
}

impl GateThresholds {
    pub fn evaluate(&self, rmse: f64, r2: f64) -> Gate {
        if rmse < self.rmse_max && r2 > self.r2_min {
            Gate::Pass
        } else {
            Gate::Fail
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rmse_max > 0.0) || !(self.r2_min > 0.0) {
            return Err(Error::Config("gate thresholds must be positive".into()));
        }
        Ok(())
    }
}

/// Gate with the default thresholds (RMSE < 0.04, R² > 0.7).
pub fn quality_gate(rmse: f64, r2: f64) -> Gate {
    GateThresholds::default().evaluate(rmse, r2)
}
