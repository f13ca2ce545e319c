use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The four physical knobs of the model.
///
/// `b0` is the Zeeman energy `μB/2`; `theta` is the polar angle of the field
/// axis in radians. Energies share one arbitrary unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    j_x: f64,
    j_z: f64,
    b0: f64,
    theta: f64,
}

impl ModelParams {
    pub fn new(j_x: f64, j_z: f64, b0: f64, theta: f64) -> Result<Self> {
        if !(j_x.is_finite() && j_z.is_finite() && b0.is_finite() && theta.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if b0 < 0.0 {
            return Err(Error::InvalidParams(format!("b0 must be non-negative, got {b0}")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParams(format!("theta must lie in [0, π], got {theta}")));
        }
        Ok(Self { j_x, j_z, b0, theta })
    }

    pub fn j_x(&self) -> f64 {
        self.j_x
    }

    pub fn j_z(&self) -> f64 {
        self.j_z
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Exchange anisotropy `J = J_x − J_z`, the only coupling the shifted
    /// triplet energies depend on.
    pub fn anisotropy(&self) -> f64 {
        self.j_x - self.j_z
    }

    /// Reference energy for relative tolerances: `max(|J_x|, |J_z|, B_0, 1)`.
    pub fn scale(&self) -> f64 {
        self.j_x.abs().max(self.j_z.abs()).max(self.b0).max(1.0)
    }

    /// Same couplings with the field axis reflected through the equator.
    pub fn mirrored(&self) -> Self {
        Self { theta: PI - self.theta, ..*self }
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.j_x, self.j_z, self.b0, theta)
    }

    pub fn with_j_x(&self, j_x: f64) -> Result<Self> {
        Self::new(j_x, self.j_z, self.b0, self.theta)
    }

    pub fn with_j_z(&self, j_z: f64) -> Result<Self> {
        Self::new(self.j_x, j_z, self.b0, self.theta)
    }
}
