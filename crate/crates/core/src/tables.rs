//! Limit regimes of the XX, Ising and XXZ models.
//!
//! Each column fixes `B_0 = 1` and realizes "≫" as a ratio of 10³ and "≪" as
//! 10⁻³. Expected cells are written for `θ ≤ π/2`; for `θ > π/2` they follow
//! from `γ_n(θ) = −γ_n(π−θ)` and `C_n(θ) = C_n(π−θ)`.

use serde::{Deserialize, Serialize};

use crate::observables::{berry_phase_unchecked, concurrence};
use crate::{spectrum, ModelParams, Result};

pub const LIMIT_RATIO: f64 = 1e3;
pub const DEFAULT_TOL: f64 = 0.01;

/// Expected `γ/2π` entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseEntry {
    Const(f64),
    /// `k·cosθ`.
    Cos(f64),
}

impl PhaseEntry {
    fn at(&self, theta: f64) -> f64 {
        match *self {
            PhaseEntry::Const(x) => x,
            PhaseEntry::Cos(k) => k * theta.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LimitColumn {
    pub table: u8,
    pub label: &'static str,
    pub j_x: f64,
    pub j_z: f64,
    /// `(C_n, γ_n/2π)` for `n = 1, 2, 3`.
    pub expected: [(f64, PhaseEntry); 3],
}

impl LimitColumn {
    pub fn params(&self, theta: f64) -> Result<ModelParams> {
        ModelParams::new(self.j_x, self.j_z, 1.0, theta)
    }

    /// Expected `(C_n, γ_n/2π)` at `theta`.
    pub fn expected_at(&self, n: usize, theta: f64) -> (f64, f64) {
        let (conc, phase) = self.expected[n - 1];
        if theta > std::f64::consts::FRAC_PI_2 {
            (conc, -phase.at(std::f64::consts::PI - theta))
        } else {
            (conc, phase.at(theta))
        }
    }
}

const SMALL: f64 = 1.0 / LIMIT_RATIO;
const LARGE: f64 = LIMIT_RATIO;

/// Field-dominated rotated-product regime shared by several columns.
const ROTATED: [(f64, PhaseEntry); 3] =
    [(0.0, PhaseEntry::Cos(-1.0)), (1.0, PhaseEntry::Const(0.0)), (0.0, PhaseEntry::Cos(1.0))];
const XX_LIMIT: [(f64, PhaseEntry); 3] =
    [(0.0, PhaseEntry::Const(-1.0)), (0.0, PhaseEntry::Const(1.0)), (1.0, PhaseEntry::Const(0.0))];
const ISING_LIMIT: [(f64, PhaseEntry); 3] =
    [(1.0, PhaseEntry::Const(0.0)), (0.0, PhaseEntry::Const(-1.0)), (0.0, PhaseEntry::Const(1.0))];

pub const COLUMNS: [LimitColumn; 7] = [
    LimitColumn { table: 1, label: "XX, J_x << B_0", j_x: SMALL, j_z: 0.0, expected: ROTATED },
    LimitColumn { table: 1, label: "XX, J_x >> B_0", j_x: LARGE, j_z: 0.0, expected: XX_LIMIT },
    LimitColumn { table: 2, label: "Ising, J_z << B_0", j_x: 0.0, j_z: SMALL, expected: ROTATED },
    LimitColumn { table: 2, label: "Ising, J_z >> B_0", j_x: 0.0, j_z: LARGE, expected: ISING_LIMIT },
    LimitColumn { table: 3, label: "J_z ~ B_0 << J_x", j_x: LARGE, j_z: 1.0, expected: XX_LIMIT },
    LimitColumn { table: 3, label: "B_0 << J_z = J_x", j_x: LARGE, j_z: LARGE, expected: ROTATED },
    LimitColumn { table: 3, label: "B_0 << J_x << J_z", j_x: LARGE, j_z: LARGE * LARGE, expected: ISING_LIMIT },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub table: u8,
    pub column: String,
    pub n: usize,
    pub theta: f64,
    pub conc: f64,
    pub berry_over_2pi: f64,
    pub expected_conc: f64,
    pub expected_berry_over_2pi: f64,
    pub degenerate: bool,
    pub pass: bool,
}

impl TableCell {
    pub fn error(&self) -> f64 {
        (self.conc - self.expected_conc).abs().max((self.berry_over_2pi - self.expected_berry_over_2pi).abs())
    }
}

/// Every triplet cell of every limit column at `theta`.
pub fn limit_tables(theta: f64, tol: f64) -> Result<Vec<TableCell>> {
    let mut cells = Vec::with_capacity(3 * COLUMNS.len());
    for col in &COLUMNS {
        let spec = spectrum::solve(&col.params(theta)?)?;
        for sol in &spec.triplets {
            let conc = concurrence(sol);
            let berry_over_2pi = berry_phase_unchecked(sol) / std::f64::consts::TAU;
            let (expected_conc, expected_berry_over_2pi) = col.expected_at(sol.n, theta);
            let pass = !sol.degenerate
                && (conc - expected_conc).abs() <= tol
                && (berry_over_2pi - expected_berry_over_2pi).abs() <= tol;
            cells.push(TableCell {
                table: col.table,
                column: col.label.to_string(),
                n: sol.n,
                theta,
                conc,
                berry_over_2pi,
                expected_conc,
                expected_berry_over_2pi,
                degenerate: sol.degenerate,
                pass,
            });
        }
    }
    Ok(cells)
}
