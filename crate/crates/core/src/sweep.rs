//! Parameter sweeps and the flat record format shared by CSV and JSON output.

use std::f64::consts::{FRAC_PI_3, TAU};
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::observables::{berry_phase_unchecked, concurrence, RatioAxis};
use crate::spectrum::{self, Spectrum};
use crate::{Error, ModelParams, Result};

/// One output row. Singlet rows leave the triplet-only fields empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub n: usize,
    pub j_x: f64,
    pub j_z: f64,
    pub b0: f64,
    pub theta: f64,
    #[serde(rename = "E_n")]
    pub energy: f64,
    pub eps_n: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub berry_over_2pi: f64,
    pub concurrence: f64,
    pub degenerate: bool,
    pub fallback_used: bool,
}

pub const CSV_HEADER: [&str; 14] = [
    "n",
    "j_x",
    "j_z",
    "b0",
    "theta",
    "E_n",
    "eps_n",
    "a",
    "b",
    "c",
    "berry_over_2pi",
    "concurrence",
    "degenerate",
    "fallback_used",
];

impl OutputRecord {
    pub fn singlet(spec: &Spectrum) -> Self {
        let p = &spec.params;
        Self {
            n: 0,
            j_x: p.j_x(),
            j_z: p.j_z(),
            b0: p.b0(),
            theta: p.theta(),
            energy: spec.singlet_energy,
            eps_n: None,
            a: None,
            b: None,
            c: None,
            berry_over_2pi: 0.0,
            concurrence: 1.0,
            degenerate: false,
            fallback_used: false,
        }
    }

    /// Row for triplet level `n`. Degenerate levels report the values of the
    /// basis vector that was chosen, with `degenerate` set.
    pub fn triplet(spec: &Spectrum, n: usize) -> Self {
        let p = &spec.params;
        let t = &spec.triplets[n - 1];
        Self {
            n,
            j_x: p.j_x(),
            j_z: p.j_z(),
            b0: p.b0(),
            theta: p.theta(),
            energy: t.energy,
            eps_n: Some(t.eps),
            a: Some(t.a),
            b: Some(t.b),
            c: Some(t.c),
            berry_over_2pi: berry_phase_unchecked(t) / TAU,
            concurrence: concurrence(t),
            degenerate: t.degenerate,
            fallback_used: t.fallback_used,
        }
    }

    pub fn all_levels(spec: &Spectrum) -> Vec<Self> {
        let mut rows = vec![Self::singlet(spec)];
        rows.extend((1..=3).map(|n| Self::triplet(spec, n)));
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// `J_z = 0`, scan `J_x/B_0`.
    Xx,
    /// `J_x = 0`, scan `J_z/B_0`.
    Ising,
    /// `J_x` fixed (default `10³·B_0`), scan `J_z/B_0` from far below to far
    /// above `J_x`.
    XxzVaryJz,
    Custom,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xx" | "omega" => Ok(Preset::Xx),
            "ising" | "lambda" => Ok(Preset::Ising),
            "xxz-vary-jz" => Ok(Preset::XxzVaryJz),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::InvalidParams(format!("unknown preset '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    Log,
    Linear,
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log" => Ok(GridKind::Log),
            "linear" | "lin" => Ok(GridKind::Linear),
            other => Err(Error::InvalidParams(format!("unknown grid kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kind: GridKind,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(kind: GridKind, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidParams(format!("grid needs at least 2 points, got {count}")));
        }
        if !(lo < hi) {
            return Err(Error::InvalidParams(format!("grid bounds must satisfy lo < hi, got {lo}, {hi}")));
        }
        if kind == GridKind::Log && lo <= 0.0 {
            return Err(Error::InvalidParams("log grid bounds must be positive".into()));
        }
        Ok(Self { kind, lo, hi, count })
    }

    /// Points from `lo` to `hi` inclusive. Log grids interpolate the exponent,
    /// so decade boundaries land exactly.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let k = k as f64;
                match self.kind {
                    GridKind::Linear => self.lo + (self.hi - self.lo) * k / last,
                    GridKind::Log => {
                        let (a, b) = (self.lo.log10(), self.hi.log10());
                        10f64.powf(a + (b - a) * k / last)
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub preset: Preset,
    /// Fixed couplings; the scanned one is overwritten per grid point.
    pub base: ModelParams,
    pub axis: RatioAxis,
    pub grid: Grid,
    pub thetas: Vec<f64>,
}

impl SweepSpec {
    /// Preset defaults. `j_x`, `j_z` and `b0` come from `base`; the preset
    /// pins whichever coupling its plane requires.
    pub fn preset(preset: Preset, base: ModelParams, axis: Option<RatioAxis>) -> Result<Self> {
        let default_grid = Grid::new(GridKind::Log, 1e-3, 1e3, 200)?;
        let (base, axis, grid) = match preset {
            Preset::Xx => (base.with_j_z(0.0)?, RatioAxis::JxOverB0, default_grid),
            Preset::Ising => (base.with_j_x(0.0)?, RatioAxis::JzOverB0, default_grid),
            Preset::XxzVaryJz => (base, RatioAxis::JzOverB0, Grid::new(GridKind::Log, 1e-3, 1e6, 181)?),
            Preset::Custom => (base, axis.unwrap_or(RatioAxis::JxOverB0), default_grid),
        };
        Ok(Self { preset, base, axis, grid, thetas: vec![FRAC_PI_3] })
    }

    pub fn validate(&self) -> Result<()> {
        if self.base.b0() <= 0.0 {
            return Err(Error::InvalidParams("sweeps scan ratios to b0, which must be positive".into()));
        }
        if self.thetas.is_empty() {
            return Err(Error::InvalidParams("theta list is empty".into()));
        }
        Grid::new(self.grid.kind, self.grid.lo, self.grid.hi, self.grid.count)?;
        Ok(())
    }
}

/// Rows ordered theta-major, then grid point, then level `n = 1, 2, 3`.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<OutputRecord>> {
    spec.validate()?;
    let ratios = spec.grid.points();
    let mut jobs = Vec::with_capacity(spec.thetas.len() * ratios.len());
    for &theta in &spec.thetas {
        let base = spec.base.with_theta(theta)?;
        for &ratio in &ratios {
            jobs.push(spec.axis.apply(&base, ratio)?);
        }
    }
    let blocks = jobs
        .par_iter()
        .map(|p| {
            let s = spectrum::solve(p)?;
            Ok((1..=3).map(|n| OutputRecord::triplet(&s, n)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(records: &[OutputRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()
}

pub fn read_csv<R: Read>(input: R) -> std::io::Result<Vec<OutputRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(std::io::Error::from)).collect()
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")
}
