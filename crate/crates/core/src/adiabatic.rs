//! Time-domain check of the Berry phase.
//!
//! The field azimuth advances as `φ(t) = ωt` over one period `T = 2π/ω`. The
//! state starts in an instantaneous eigenstate, `i dψ/dt = H(t)ψ` is integrated
//! with fixed-step RK4 (`ħ = 1`), and the geometric phase is what remains of
//! the total phase after the dynamical phase `−∫⟨ψ|H|ψ⟩dt` is removed.
//!
//! The integrator works with `H(t) − E_n`. The eigenvalue `E_n` does not depend
//! on `φ`, so the shift is a c-number that is added back exactly to both the
//! total and the dynamical phase; it keeps the RK4 phase error of the dominant
//! component negligible over long periods.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::oracle::{hamiltonian, matvec};
use crate::spectrum::{self, StateVector};
use crate::{wrap_angle, Error, ModelParams, Result};

/// Fidelity below which the run is not considered adiabatic.
pub const FIDELITY_THRESHOLD: f64 = 0.9;
/// `ω` above this fraction of the smallest gap triggers the adiabaticity warning.
pub const GAP_FRACTION: f64 = 0.01;
/// Largest accepted `dt·‖H‖`.
pub const MAX_DT_NORM: f64 = 0.1;
/// `dt·‖H‖` targeted by [`AdiabaticSchedule::for_params`].
pub const DEFAULT_DT_NORM: f64 = 0.02;
pub const MIN_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSchedule {
    omega: f64,
    steps: usize,
}

impl AdiabaticSchedule {
    pub fn new(omega: f64, steps: usize) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        if steps < MIN_STEPS {
            return Err(Error::InvalidParams(format!("need at least {MIN_STEPS} steps, got {steps}")));
        }
        Ok(Self { omega, steps })
    }

    /// Default `ω = 10⁻³·scale`.
    pub fn default_omega(params: &ModelParams) -> f64 {
        1e-3 * params.scale()
    }

    /// Schedule at `omega` with enough steps for `dt·‖H‖ ≤ 0.02`.
    pub fn for_params(params: &ModelParams, omega: f64) -> Result<Self> {
        let period = TAU / omega;
        let steps = (period * spectral_norm(params) / DEFAULT_DT_NORM).ceil() as usize;
        Self::new(omega, steps.max(MIN_STEPS))
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    pub fn dt(&self) -> f64 {
        self.period() / self.steps as f64
    }
}

/// `‖H‖₂`, the largest eigenvalue magnitude (independent of `φ`).
pub fn spectral_norm(params: &ModelParams) -> f64 {
    spectrum::eigenvalues(params).iter().fold(0.0, |m, e| m.max(e.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionResult {
    pub level: usize,
    pub final_state: StateVector,
    /// `−∫₀ᵀ⟨ψ|H|ψ⟩dt`, unwrapped.
    pub dynamical_phase: f64,
    /// `arg⟨ψ(0)|ψ(T)⟩` in `(−π, π]`.
    pub total_phase: f64,
    /// `|⟨Ψ_n(T)|ψ(T)⟩|`.
    pub fidelity: f64,
    /// Smallest distance from `E_n` to another level it can couple to.
    pub min_gap: f64,
    /// Sum over steps of `|‖ψ‖ − 1|` removed by renormalization.
    pub norm_correction: f64,
    /// `ω > 0.01 × min_gap`.
    pub gap_warning: bool,
}

impl EvolutionResult {
    pub fn is_adiabatic(&self) -> bool {
        self.fidelity >= FIDELITY_THRESHOLD
    }
}

fn add_scaled(x: &[Complex64; 4], k: &[Complex64; 4], h: f64) -> [Complex64; 4] {
    [x[0] + k[0] * h, x[1] + k[1] * h, x[2] + k[2] * h, x[3] + k[3] * h]
}

struct ShiftedHamiltonian {
    params: ModelParams,
    omega: f64,
    shift: f64,
}

impl ShiftedHamiltonian {
    fn at(&self, t: f64) -> [[Complex64; 4]; 4] {
        let mut m = *hamiltonian(&self.params, self.omega * t).entries();
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= self.shift;
        }
        m
    }

    /// `−i (H − E) ψ`.
    fn rhs(m: &[[Complex64; 4]; 4], psi: &[Complex64; 4]) -> [Complex64; 4] {
        matvec(m, psi).map(|z| Complex64::new(z.im, -z.re))
    }

    fn energy(m: &[[Complex64; 4]; 4], psi: &[Complex64; 4]) -> f64 {
        let hpsi = matvec(m, psi);
        psi.iter().zip(hpsi.iter()).map(|(x, y)| (x.conj() * y).re).sum()
    }
}

/// Integrates one full rotation starting from level `n` at `φ = 0`.
pub fn evolve(params: &ModelParams, sched: &AdiabaticSchedule, n: usize) -> Result<EvolutionResult> {
    if n > 3 {
        return Err(Error::LevelOutOfRange(n));
    }
    let spec = spectrum::solve(params)?;
    let energies = spec.energies();
    let min_gap = if n == 0 { spec.gap(0) } else { spec.triplet_gap(n) };
    if n > 0 && spec.triplets[n - 1].degenerate {
        return Err(Error::DegenerateSpectrum { level: n, gap: min_gap });
    }

    let dt = sched.dt();
    let dt_norm = dt * spectral_norm(params);
    if dt_norm >= MAX_DT_NORM {
        return Err(Error::StepUnderflow { dt_norm });
    }
    // The singlet is decoupled by symmetry, so its gap cannot be crossed.
    let gap_warning = n > 0 && sched.omega() > GAP_FRACTION * min_gap;

    let initial = spectrum::eigenstate(params, n, 0.0)?;
    let ham = ShiftedHamiltonian { params: *params, omega: sched.omega(), shift: energies[n] };

    let mut psi = initial.0;
    let mut norm_correction = 0.0;
    let mut h_now = ham.at(0.0);
    let mut e_now = ShiftedHamiltonian::energy(&h_now, &psi);
    let mut energy_integral = 0.0;
    for k in 0..sched.steps() {
        let t = k as f64 * dt;
        let h_mid = ham.at(t + 0.5 * dt);
        let h_next = ham.at(t + dt);

        let k1 = ShiftedHamiltonian::rhs(&h_now, &psi);
        let k2 = ShiftedHamiltonian::rhs(&h_mid, &add_scaled(&psi, &k1, 0.5 * dt));
        let k3 = ShiftedHamiltonian::rhs(&h_mid, &add_scaled(&psi, &k2, 0.5 * dt));
        let k4 = ShiftedHamiltonian::rhs(&h_next, &add_scaled(&psi, &k3, dt));
        for i in 0..4 {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }

        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        norm_correction += (norm - 1.0).abs();
        psi = psi.map(|z| z / norm);

        let e_next = ShiftedHamiltonian::energy(&h_next, &psi);
        energy_integral += 0.5 * dt * (e_now + e_next);
        e_now = e_next;
        h_now = h_next;
    }

    let final_state = StateVector(psi);
    let shift_phase = energies[n] * sched.period();
    let total_phase = wrap_angle(initial.inner(&final_state).arg() - shift_phase);
    let dynamical_phase = -energy_integral - shift_phase;
    let target = spectrum::eigenstate(params, n, TAU)?;
    let fidelity = target.inner(&final_state).norm().min(1.0);

    Ok(EvolutionResult {
        level: n,
        final_state,
        dynamical_phase,
        total_phase,
        fidelity,
        min_gap,
        norm_correction,
        gap_warning,
    })
}

/// `wrap(total − dynamical)` in `(−π, π]`.
pub fn geometric_phase(result: &EvolutionResult) -> Result<f64> {
    if !result.is_adiabatic() {
        return Err(Error::AdiabaticityViolation { fidelity: result.fidelity });
    }
    Ok(wrap_angle(result.total_phase - result.dynamical_phase))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    use super::*;
    use crate::angular_distance;

    fn params(j_x: f64, j_z: f64, b0: f64, theta: f64) -> ModelParams {
        ModelParams::new(j_x, j_z, b0, theta).unwrap()
    }

    #[test]
    fn schedule_validation() {
        assert!(AdiabaticSchedule::new(0.0, 5000).is_err());
        assert!(AdiabaticSchedule::new(1e-3, 10).is_err());
        let s = AdiabaticSchedule::new(0.5, 2000).unwrap();
        assert!((s.period() - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn step_underflow() {
        let p = params(1.0, 1.0, 1.0, FRAC_PI_3);
        let s = AdiabaticSchedule::new(1e-3, 1000).unwrap();
        assert!(matches!(evolve(&p, &s, 1), Err(Error::StepUnderflow { .. })));
    }

    #[test]
    fn heisenberg_lowest_triplet_picks_up_minus_pi() {
        let p = params(1.0, 1.0, 1.0, FRAC_PI_3);
        let s = AdiabaticSchedule::new(1e-3, 200_000).unwrap();
        let r = evolve(&p, &s, 1).unwrap();
        assert!(r.fidelity > 0.999, "{}", r.fidelity);
        assert!(!r.gap_warning);
        let g = geometric_phase(&r).unwrap();
        assert!(angular_distance(g, -PI) < 0.05, "{g}");
    }

    #[test]
    fn singlet_only_gains_dynamical_phase() {
        let p = params(0.7, 0.4, 1.0, 1.0);
        let s = AdiabaticSchedule::new(0.05, 4000).unwrap();
        let r = evolve(&p, &s, 0).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        let expected = wrap_angle((0.4 + 2.0 * 0.7) * s.period());
        assert!(angular_distance(r.total_phase, expected) < 1e-9);
        assert!(geometric_phase(&r).unwrap().abs() < 1e-9);
    }

    #[test]
    fn equator_has_no_geometric_phase() {
        let p = params(0.5, 0.2, 1.0, FRAC_PI_2);
        let s = AdiabaticSchedule::for_params(&p, 1e-3).unwrap();
        let r = evolve(&p, &s, 3).unwrap();
        assert!(geometric_phase(&r).unwrap().abs() < 0.02);
    }

    #[test]
    fn fast_rotation_is_flagged() {
        let p = params(1.0, 1.0, 1.0, FRAC_PI_3);
        let s = AdiabaticSchedule::for_params(&p, 1.0).unwrap();
        let r = evolve(&p, &s, 1).unwrap();
        assert!(r.gap_warning);
    }
}
