//! Randomized cross-check of the closed-form route against the oracle, plus the
//! symmetry relations the closed form must satisfy.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::observables::{berry_phase_unchecked, concurrence};
use crate::oracle::{self, concurrence_numeric, hamiltonian, split_sectors};
use crate::spectrum::{self, TripletSolution};
use crate::{Error, ModelParams, Result};

/// Berry-phase formula under test; swappable so a broken formula can be
/// shown to fail the check.
pub type BerryFormula = fn(&TripletSolution) -> f64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckTolerances {
    /// On `|F(ε_n)| / scale³`.
    pub root: f64,
    /// On `|E_oracle − E_analytic| / scale`.
    pub eig: f64,
    pub berry: f64,
    pub conc: f64,
    /// On `‖Hv − Ev‖ / ‖H‖` for the analytic eigenstates.
    pub residual: f64,
    pub symmetry: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self { root: 1e-9, eig: 1e-9, berry: 1e-8, conc: 1e-8, residual: 1e-9, symmetry: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub samples: usize,
    pub seed: u64,
    pub tolerances: CheckTolerances,
    pub berry_formula: BerryFormula,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { samples: 1000, seed: 42, tolerances: CheckTolerances::default(), berry_formula: berry_phase_unchecked }
    }
}

/// Log-uniform magnitude in `[1e−3, 1e3]`.
fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(-3.0..=3.0))
}

/// Random couplings with random sign, positive field, `θ ∈ (0, π)`.
pub fn sample_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let j_x = log_uniform(rng) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let j_z = log_uniform(rng) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let b0 = log_uniform(rng);
    let theta = loop {
        let t: f64 = rng.gen_range(0.0..PI);
        if t > 0.0 {
            break t;
        }
    };
    ModelParams::new(j_x, j_z, b0, theta).expect("sampled parameters are valid")
}

pub fn random_params(seed: u64, count: usize) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample_params(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub level: Option<usize>,
    pub value: f64,
    pub j_x: f64,
    pub j_z: f64,
    pub b0: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub samples: usize,
    pub seed: u64,
    pub max_root_residual: f64,
    pub max_eig_mismatch: f64,
    pub max_berry_mismatch: f64,
    pub max_conc_mismatch: f64,
    pub max_state_residual: f64,
    pub symmetry_violations: usize,
    pub degenerate_levels_skipped: usize,
    pub tolerances: CheckTolerances,
    pub passed: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Default)]
struct SampleReport {
    root_residual: f64,
    eig_mismatch: f64,
    berry_mismatch: f64,
    conc_mismatch: f64,
    state_residual: f64,
    degenerate: usize,
    violations: Vec<Violation>,
}

struct Recorder<'a> {
    params: &'a ModelParams,
    violations: Vec<Violation>,
}

impl Recorder<'_> {
    fn flag(&mut self, ok: bool, kind: &str, level: Option<usize>, value: f64) {
        if !ok {
            let p = self.params;
            self.violations.push(Violation {
                kind: kind.to_string(),
                level,
                value,
                j_x: p.j_x(),
                j_z: p.j_z(),
                b0: p.b0(),
                theta: p.theta(),
            });
        }
    }
}

/// Eigenvector error per unit of `scale/gap` allowed on top of the Berry and
/// concurrence tolerances.
const CONDITIONING: f64 = 1e-13;

const RESIDUAL_PHIS: [f64; 3] = [0.0, 1.3, 4.0];

fn check_sample(params: &ModelParams, config: &CheckConfig) -> Result<SampleReport> {
    let tol = &config.tolerances;
    let scale = params.scale();
    let mut rec = Recorder { params, violations: Vec::new() };
    let mut report = SampleReport::default();

    let spec = spectrum::solve(params)?;
    let mirror = spectrum::solve(&params.mirrored())?;
    let inv = spectrum::cubic_invariants(params)?;

    // Roots and ordering.
    for t in &spec.triplets {
        let res = spectrum::shifted_cubic(t.eps, params).abs() / scale.powi(3);
        report.root_residual = report.root_residual.max(res);
    }
    let eps: Vec<f64> = spec.triplets.iter().map(|t| t.eps).collect();
    rec.flag(eps[0] <= eps[1] && eps[1] <= eps[2], "ascending", None, eps[1]);
    let reality = inv.r * inv.r - inv.q.powi(3);
    rec.flag(reality <= tol.symmetry * inv.q.powi(3), "reality", None, reality);

    // Oracle spectrum and gauge invariants.
    let split = split_sectors(&hamiltonian(params, 0.0))?;
    let mut oracle_values = [split.singlet_energy, split.triplet_values[0], split.triplet_values[1], split.triplet_values[2]];
    let mut analytic_values = spec.energies();
    oracle_values.sort_by(f64::total_cmp);
    analytic_values.sort_by(f64::total_cmp);
    for (x, y) in oracle_values.iter().zip(analytic_values.iter()) {
        report.eig_mismatch = report.eig_mismatch.max((x - y).abs() / scale);
    }

    for (t, m) in spec.triplets.iter().zip(mirror.triplets.iter()) {
        let norm = t.a * t.a + t.b * t.b + t.c * t.c;
        rec.flag((norm - 1.0).abs() <= tol.symmetry, "normalization", Some(t.n), norm);

        let oracle_gap = split.triplet_gap(t.n);
        if t.degenerate || oracle_gap < oracle::GAP_TOL * scale {
            report.degenerate += 1;
            continue;
        }
        let v = split.triplet_vectors[t.n - 1];
        let berry_numeric = TAU * (v[0].norm_sqr() - v[3].norm_sqr());
        let berry = (config.berry_formula)(t);
        let conc = concurrence(t);
        let berry_err = (berry - berry_numeric).abs();
        let conc_err = (conc - concurrence_numeric(&v)?).abs();
        report.berry_mismatch = report.berry_mismatch.max(berry_err);
        report.conc_mismatch = report.conc_mismatch.max(conc_err);
        // Both sides carry eigenvector error of order u·scale/gap.
        let conditioning = CONDITIONING * scale / oracle_gap.min(spec.triplet_gap(t.n));
        rec.flag(berry_err <= tol.berry + conditioning, "berry_mismatch", Some(t.n), berry_err);
        rec.flag(conc_err <= tol.conc + conditioning, "concurrence_mismatch", Some(t.n), conc_err);

        let berry_mirror = (config.berry_formula)(m);
        rec.flag((berry + berry_mirror).abs() <= tol.symmetry, "berry_antisymmetry", Some(t.n), berry + berry_mirror);
        let conc_mirror = concurrence(m);
        rec.flag((conc - conc_mirror).abs() <= tol.symmetry, "concurrence_mirror", Some(t.n), conc - conc_mirror);
        rec.flag(berry.abs() <= TAU + tol.symmetry, "berry_range", Some(t.n), berry);
        rec.flag((0.0..=1.0).contains(&conc), "concurrence_range", Some(t.n), conc);
        // 1 − C = (a ± c)², so |γ| ≤ 2π√2·√(1 − C) and maximal entanglement
        // forces γ = 0. The bound is sharp, hence the floor for rounding in 1 − C.
        let bound = TAU * std::f64::consts::SQRT_2 * (1.0 - conc + 1e-14).max(0.0).sqrt();
        rec.flag(berry.abs() <= bound + tol.symmetry, "entangled_zero_phase", Some(t.n), berry);
    }

    // Analytic eigenstates against the explicit matrix, all levels.
    for phi in RESIDUAL_PHIS {
        let h = hamiltonian(params, phi);
        let h_norm = h.frobenius_norm();
        for (n, energy) in spec.energies().iter().enumerate() {
            let v = if n == 0 { crate::StateVector::singlet() } else { spec.triplets[n - 1].state(phi) };
            let hv = h.apply(&v);
            let r = hv.0.iter().zip(v.0.iter()).map(|(x, y)| (x - y * energy).norm_sqr()).sum::<f64>().sqrt();
            // A flagged pair is only resolved to within its splitting.
            let slack = if n > 0 && spec.triplets[n - 1].degenerate { spec.triplet_gap(n) } else { 0.0 };
            report.state_residual = report.state_residual.max((r - slack).max(0.0) / h_norm);
        }
    }

    rec.flag(report.root_residual <= tol.root, "root_residual", None, report.root_residual);
    rec.flag(report.eig_mismatch <= tol.eig, "eigenvalue_mismatch", None, report.eig_mismatch);
    rec.flag(report.state_residual <= tol.residual, "state_residual", None, report.state_residual);
    report.violations = rec.violations;
    Ok(report)
}

const SYMMETRY_KINDS: [&str; 7] = [
    "ascending",
    "reality",
    "normalization",
    "berry_antisymmetry",
    "concurrence_mirror",
    "berry_range",
    "entangled_zero_phase",
];

/// Runs the suite. Samples are evaluated in parallel and merged in order, so
/// the summary is identical for a given seed.
pub fn run(config: &CheckConfig) -> Result<CheckSummary> {
    if config.samples == 0 {
        return Err(Error::InvalidParams("samples must be positive".into()));
    }
    let params = random_params(config.seed, config.samples);
    let reports = params.par_iter().map(|p| check_sample(p, config)).collect::<Result<Vec<_>>>()?;

    let mut summary = CheckSummary {
        samples: config.samples,
        seed: config.seed,
        max_root_residual: 0.0,
        max_eig_mismatch: 0.0,
        max_berry_mismatch: 0.0,
        max_conc_mismatch: 0.0,
        max_state_residual: 0.0,
        symmetry_violations: 0,
        degenerate_levels_skipped: 0,
        tolerances: config.tolerances,
        passed: true,
        violations: Vec::new(),
    };
    for r in reports {
        summary.max_root_residual = summary.max_root_residual.max(r.root_residual);
        summary.max_eig_mismatch = summary.max_eig_mismatch.max(r.eig_mismatch);
        summary.max_berry_mismatch = summary.max_berry_mismatch.max(r.berry_mismatch);
        summary.max_conc_mismatch = summary.max_conc_mismatch.max(r.conc_mismatch);
        summary.max_state_residual = summary.max_state_residual.max(r.state_residual);
        summary.degenerate_levels_skipped += r.degenerate;
        summary.symmetry_violations +=
            r.violations.iter().filter(|v| SYMMETRY_KINDS.contains(&v.kind.as_str())).count();
        summary.violations.extend(r.violations);
    }
    summary.passed = summary.violations.is_empty();
    Ok(summary)
}
