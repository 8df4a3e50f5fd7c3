use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PARAM_NAMES: [&str; 3] = ["thickness_nm", "index_scale", "theta0_deg"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub thickness_nm: f64,
    /// Multiplier on the film's tabulated n(λ).
    pub index_scale: f64,
    pub theta0_deg: f64,
}

impl FitParams {
    pub fn new(thickness_nm: f64) -> Self {
        Self {
            thickness_nm,
            index_scale: 1.0,
            theta0_deg: 0.0,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.thickness_nm, self.index_scale, self.theta0_deg]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            thickness_nm: a[0],
            index_scale: a[1],
            theta0_deg: a[2],
        }
    }
}

/// Rectangular bounds with a free/fixed flag per parameter, ordered as
/// thickness, index scale, incidence angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub free: [bool; 3],
}

impl Default for Bounds {
    fn default() -> Self {
        Self::thickness_only(50.0, 1000.0)
    }
}

impl Bounds {
    /// Thickness free in `[lo, hi]` nm; index scale and angle fixed.
    pub fn thickness_only(lo: f64, hi: f64) -> Self {
        Self {
            lower: [lo, 0.98, 0.0],
            upper: [hi, 1.02, 1.0],
            free: [true, false, false],
        }
    }

    /// Frees the index scale within ±2 %.
    pub fn with_free_index_scale(mut self, around: f64) -> Self {
        self.lower[1] = around * 0.98;
        self.upper[1] = around * 1.02;
        self.free[1] = true;
        self
    }

    /// Frees the incidence angle within ±1°, never below normal incidence.
    pub fn with_free_theta(mut self, around_deg: f64) -> Self {
        self.lower[2] = (around_deg - 1.0).max(0.0);
        self.upper[2] = around_deg + 1.0;
        self.free[2] = true;
        self
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..3 {
            if self.free[i] && !(self.lower[i] < self.upper[i]) {
                return Err(Error::BoundsViolation(format!(
                    "{}: lower {} must be below upper {}",
                    PARAM_NAMES[i], self.lower[i], self.upper[i]
                )));
            }
        }
        if self.free[0] && self.lower[0] < 0.0 {
            return Err(Error::BoundsViolation("thickness lower bound must be >= 0".into()));
        }
        if self.free[1] && self.lower[1] <= 0.0 {
            return Err(Error::BoundsViolation("index scale lower bound must be > 0".into()));
        }
        if self.free[2] && (self.lower[2] < 0.0 || self.upper[2] >= 90.0) {
            return Err(Error::BoundsViolation("incidence bounds must lie in [0, 90)".into()));
        }
        if self.free_count() == 0 {
            return Err(Error::BoundsViolation("no free parameter".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: &FitParams) -> bool {
        let a = p.to_array();
        (0..3).all(|i| !self.free[i] || (a[i] >= self.lower[i] && a[i] <= self.upper[i]))
    }

    pub(crate) fn free_indices(&self) -> Vec<usize> {
        (0..3).filter(|&i| self.free[i]).collect()
    }
}
