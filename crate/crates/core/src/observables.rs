//! Berry phase and concurrence of each eigenstate.
//!
//! For `a e^{−iφ}|↑↑⟩ + b/√2 (|↑↓⟩ + |↓↑⟩) + c e^{iφ}|↓↓⟩` one full turn of the
//! field azimuth gives `γ = 2π(a² − c²)` and the concurrence is `|2ac − b²|`.
//! The singlet is φ-independent and maximally entangled: `γ = 0`, `C = 1`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spectrum::{self, TripletSolution};
use crate::{Error, ModelParams, Result};

pub const SINGLET_BERRY: f64 = 0.0;
pub const SINGLET_CONCURRENCE: f64 = 1.0;

/// Unwound Berry phase in radians, within `[−2π, 2π]`.
pub fn berry_phase(sol: &TripletSolution) -> Result<f64> {
    if sol.degenerate {
        return Err(Error::DegenerateSpectrum { level: sol.n, gap: 0.0 });
    }
    Ok(berry_phase_unchecked(sol))
}

/// `2π(a² − c²)` without the degeneracy guard.
pub fn berry_phase_unchecked(sol: &TripletSolution) -> f64 {
    std::f64::consts::TAU * (sol.a * sol.a - sol.c * sol.c)
}

pub fn concurrence(sol: &TripletSolution) -> f64 {
    (2.0 * sol.a * sol.c - sol.b * sol.b).abs().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub n: usize,
    pub berry: f64,
    pub conc: f64,
}

impl ObservableRecord {
    pub fn singlet() -> Self {
        Self { n: 0, berry: SINGLET_BERRY, conc: SINGLET_CONCURRENCE }
    }

    pub fn for_triplet(sol: &TripletSolution) -> Result<Self> {
        Ok(Self { n: sol.n, berry: berry_phase(sol)?, conc: concurrence(sol) })
    }

    pub fn berry_over_2pi(&self) -> f64 {
        self.berry / std::f64::consts::TAU
    }
}

pub type LevelRecords = [Result<ObservableRecord>; 4];

/// Records for `n = 0..=3`. A degenerate level yields its own error while the
/// other levels stay usable.
pub fn observables_for(params: &ModelParams) -> Result<LevelRecords> {
    let spec = spectrum::solve(params)?;
    let t = &spec.triplets;
    Ok([
        Ok(ObservableRecord::singlet()),
        ObservableRecord::for_triplet(&t[0]),
        ObservableRecord::for_triplet(&t[1]),
        ObservableRecord::for_triplet(&t[2]),
    ])
}

/// Which coupling is scanned, in units of `B_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioAxis {
    #[serde(rename = "jx/b0")]
    JxOverB0,
    #[serde(rename = "jz/b0")]
    JzOverB0,
}

impl RatioAxis {
    pub fn apply(&self, base: &ModelParams, ratio: f64) -> Result<ModelParams> {
        let value = ratio * base.b0();
        match self {
            RatioAxis::JxOverB0 => base.with_j_x(value),
            RatioAxis::JzOverB0 => base.with_j_z(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationPoint {
    pub ratio: f64,
    pub params: ModelParams,
    pub levels: LevelRecords,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationCurve {
    pub axis: RatioAxis,
    pub points: Vec<RelationPoint>,
}

impl RelationCurve {
    /// `(C_n, γ_n)` trajectory of one level, skipping degenerate points.
    pub fn trajectory(&self, n: usize) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.levels.get(n)?.as_ref().ok().map(|r| (r.conc, r.berry)))
            .collect()
    }
}

/// Observables along a ratio grid, other parameters held at `base`.
pub fn relation_curve(base: &ModelParams, axis: RatioAxis, ratios: &[f64]) -> Result<RelationCurve> {
    if base.b0() <= 0.0 {
        return Err(Error::InvalidParams("relation curves need b0 > 0".into()));
    }
    if ratios.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParams("ratios must be positive and finite".into()));
    }
    if ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("ratios must be strictly increasing".into()));
    }
    let points = ratios
        .par_iter()
        .map(|&ratio| {
            let params = axis.apply(base, ratio)?;
            Ok(RelationPoint { ratio, params, levels: observables_for(&params)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RelationCurve { axis, points })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, PI, TAU};

    use super::*;

    fn sol(a: f64, b: f64, c: f64) -> TripletSolution {
        TripletSolution { n: 1, eps: 0.0, energy: 0.0, a, b, c, d: 1.0, fallback_used: false, degenerate: false }
    }

    fn params(j_x: f64, j_z: f64, b0: f64, theta: f64) -> ModelParams {
        ModelParams::new(j_x, j_z, b0, theta).unwrap()
    }

    #[test]
    fn berry_examples() {
        assert!((berry_phase(&sol(0.25, -0.612_372_435_695_794_5, 0.75)).unwrap() + PI).abs() < 1e-14);
        assert_eq!(berry_phase(&sol(0.5, FRAC_1_SQRT_2, 0.5)).unwrap(), 0.0);
        assert_eq!(berry_phase(&sol(0.0, 0.0, 1.0)).unwrap(), -TAU);
        let mut s = sol(1.0, 0.0, 0.0);
        s.degenerate = true;
        assert!(matches!(berry_phase(&s), Err(Error::DegenerateSpectrum { .. })));
    }

    #[test]
    fn concurrence_examples() {
        assert_eq!(concurrence(&sol(0.0, 1.0, 0.0)), 1.0);
        assert!(concurrence(&sol(0.25, -0.612_372_435_695_794_5, 0.75)) < 1e-15);
        assert!((concurrence(&sol(FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn observables_for_examples() {
        let r = observables_for(&params(1.0, 1.0, 1.0, FRAC_PI_3)).unwrap();
        assert_eq!(r[0], Ok(ObservableRecord::singlet()));
        let two = r[2].as_ref().unwrap();
        assert!(two.berry.abs() < 1e-14 && (two.conc - 1.0).abs() < 1e-14);

        let r = observables_for(&params(1000.0, 0.0, 1.0, FRAC_PI_3)).unwrap();
        let (two, three) = (r[2].as_ref().unwrap(), r[3].as_ref().unwrap());
        assert!(three.berry.abs() < 1e-2 && (three.conc - 1.0).abs() < 1e-2);
        assert!((two.berry - TAU).abs() < 1e-2 && two.conc < 1e-2);

        let r = observables_for(&params(0.0, 1000.0, 1.0, FRAC_PI_3)).unwrap();
        let (one, three) = (r[1].as_ref().unwrap(), r[3].as_ref().unwrap());
        assert!(one.berry.abs() < 1e-2 && (one.conc - 1.0).abs() < 1e-2);
        assert!((three.berry - TAU).abs() < 1e-2 && three.conc < 1e-2);
    }

    #[test]
    fn degenerate_level_is_isolated() {
        let r = observables_for(&params(2.0, 0.5, 0.0, 0.7)).unwrap();
        assert!(r[1].is_err() && r[2].is_err());
        assert!(r[0].is_ok() && r[3].is_ok());
    }

    #[test]
    fn relation_curve_endpoints() {
        let base = params(0.0, 0.0, 1.0, FRAC_PI_3);
        let ratios: Vec<f64> = (0..=60).map(|k| 10f64.powf(-3.0 + 0.1 * k as f64)).collect();
        let curve = relation_curve(&base, RatioAxis::JxOverB0, &ratios).unwrap();
        let first = curve.points.first().unwrap().levels[1].as_ref().unwrap();
        let last = curve.points.last().unwrap().levels[1].as_ref().unwrap();
        assert!(first.conc < 1e-2 && (first.berry_over_2pi() + 0.5).abs() < 1e-2);
        assert!(last.conc < 1e-2 && (last.berry_over_2pi() + 1.0).abs() < 1e-2);
        assert_eq!(curve.trajectory(1).len(), ratios.len());
    }

    #[test]
    fn single_point_curve_matches_observables_for() {
        let base = params(0.0, 0.3, 2.0, 1.1);
        let curve = relation_curve(&base, RatioAxis::JxOverB0, &[0.7]).unwrap();
        let direct = observables_for(&base.with_j_x(1.4).unwrap()).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].levels, direct);
    }

    #[test]
    fn relation_curve_rejects_bad_grids() {
        let base = params(0.0, 0.0, 1.0, FRAC_PI_2);
        assert!(relation_curve(&base, RatioAxis::JzOverB0, &[1.0, 1.0]).is_err());
        assert!(relation_curve(&base, RatioAxis::JzOverB0, &[-1.0, 1.0]).is_err());
        assert!(relation_curve(&params(0.0, 0.0, 0.0, 1.0), RatioAxis::JzOverB0, &[1.0]).is_err());
    }
}
