//! Two exchange-coupled qubits in a slowly rotating magnetic field.
//!
//! The Hamiltonian is the XXZ exchange `J_x (σˣσˣ + σʸσʸ) + J_z σᶻσᶻ` (Pauli
//! matrices) plus a Zeeman term `B_0 (σ₁ + σ₂)·n̂(φ)`, where
//! `n̂ = (sinθ cosφ, sinθ sinφ, cosθ)`. In this convention the singlet energy is
//! `-(J_z + 2J_x)` and the triplet block has characteristic polynomial
//! `ε³ − 2Jε² − 4B_0²ε + 8JB_0²cos²θ` in the shifted energy `ε = E − J_z`, with
//! `J = J_x − J_z`.
//!
//! * [`spectrum`]: closed-form roots, eigenvalues and eigenstate coefficients.
//! * [`observables`]: Berry phase and concurrence per level, relation curves.
//! * [`oracle`]: brute-force 4×4 diagonalization, Wilson loop, numeric concurrence.
//! * [`adiabatic`]: time-domain integration over one rotation period.
//! * [`check`], [`tables`], [`sweep`], [`cli`]: the command-line front end.

pub mod adiabatic;
pub mod check;
pub mod cli;
mod error;
pub mod observables;
pub mod oracle;
mod params;
pub mod spectrum;
pub mod sweep;
pub mod tables;

pub use error::{Error, Result};
pub use params::ModelParams;
pub use spectrum::StateVector;

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Minimal distance between two angles on the circle.
pub fn angular_distance(x: f64, y: f64) -> f64 {
    wrap_angle(x - y).abs()
}
