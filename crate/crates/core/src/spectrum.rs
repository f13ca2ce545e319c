//! Closed-form eigensystem of the two-qubit XXZ Hamiltonian in a rotating field.
//!
//! The singlet `(|↑↓⟩ − |↓↑⟩)/√2` is an eigenstate for every parameter choice with
//! energy `−(J_z + 2J_x)`. The three remaining levels live in the triplet sector
//! and are the roots of a real cubic in the shifted energy `ε = E − J_z`, solved
//! here with the trigonometric (Viète) form. Eigenstates are
//! `a e^{−iφ}|↑↑⟩ + b/√2 (|↑↓⟩ + |↓↑⟩) + c e^{iφ}|↓↓⟩` with real `a, b, c`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, ModelParams, Result};

/// Relative root gap below which two triplet levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Relative threshold on the normalizer `d` below which the closed-form
/// coefficients are replaced by a direct null-space solve.
pub const SINGULAR_D_TOL: f64 = 1e-10;
/// Slack allowed on `|R/√Q³|` before the arccos argument is clamped.
pub const ARCCOS_CLAMP_TOL: f64 = 1e-12;
/// Relative residual (in units of `scale³`) accepted by [`triplet_coefficients`].
pub const ROOT_TOL: f64 = 1e-9;

/// `F(ε, J) = ε³ − 2Jε² − 4B_0²ε + 8JB_0²cos²θ` with `J = J_x − J_z`.
pub fn shifted_cubic(eps: f64, params: &ModelParams) -> f64 {
    let j = params.anisotropy();
    let b2 = params.b0() * params.b0();
    let c2 = params.theta().cos().powi(2);
    ((eps - 2.0 * j) * eps - 4.0 * b2) * eps + 8.0 * j * b2 * c2
}

fn shifted_cubic_derivative(eps: f64, params: &ModelParams) -> f64 {
    let j = params.anisotropy();
    let b2 = params.b0() * params.b0();
    (3.0 * eps - 4.0 * j) * eps - 4.0 * b2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicInvariants {
    pub q: f64,
    pub r: f64,
    /// `arccos(r/√q³)`, always in `[0, π]`.
    pub p: f64,
}

/// `Q`, `R` and `P` of the trigonometric root formula.
///
/// `Q = 0` only when `J = 0` and `B_0 = 0`; that case is reported as
/// [`Error::DegenerateInput`].
pub fn cubic_invariants(params: &ModelParams) -> Result<CubicInvariants> {
    let j = params.anisotropy();
    let b2 = params.b0() * params.b0();
    let c2 = params.theta().cos().powi(2);
    let q = 4.0 * (j * j + 3.0 * b2) / 9.0;
    let r = 4.0 * j * (2.0 * j * j + 9.0 * b2 * (1.0 - 3.0 * c2)) / 27.0;
    if q == 0.0 {
        return Err(Error::DegenerateInput);
    }
    let ratio = r / (q * q.sqrt());
    if ratio.abs() > 1.0 + ARCCOS_CLAMP_TOL || ratio.is_nan() {
        return Err(Error::ArccosDomain { ratio });
    }
    let p = ratio.clamp(-1.0, 1.0).acos();
    Ok(CubicInvariants { q, r, p })
}

/// The three shifted triplet energies `ε_1 ≤ ε_2 ≤ ε_3`.
///
/// Branch `n` of `2√Q cos((P + 2nπ)/3) + 2J/3` is ascending in `n` because
/// `P ∈ [0, π]`. Each root gets a guarded Newton polish to remove the
/// cancellation error of the trigonometric form.
pub fn triplet_shifted_roots(params: &ModelParams) -> Result<[f64; 3]> {
    let inv = cubic_invariants(params)?;
    let j = params.anisotropy();
    let amp = 2.0 * inv.q.sqrt();
    let mut roots = [1.0, 2.0, 3.0].map(|n: f64| amp * ((inv.p + TAU * n) / 3.0).cos() + 2.0 * j / 3.0);

    // Near a double root the arccos loses half the digits, which can put two
    // estimates on the wrong side of each other. Polish the isolated extreme
    // root, then recover the close pair from Vieta's relations.
    let (lower_gap, upper_gap) = (roots[1] - roots[0], roots[2] - roots[1]);
    let iso = if lower_gap < upper_gap { 2 } else { 0 };
    let r = polish_root(roots[iso], 0.25 * lower_gap.max(upper_gap), params);
    if r != 0.0 {
        let b2 = params.b0() * params.b0();
        let c2 = params.theta().cos().powi(2);
        let sum = 2.0 * j - r;
        let product = -8.0 * j * b2 * c2 / r;
        let disc = (sum * sum - 4.0 * product).max(0.0);
        let q = 0.5 * (sum + sum.signum() * disc.sqrt());
        let (x, y) = if q == 0.0 { (0.0, 0.0) } else { (q, product / q) };
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        roots = if iso == 2 { [lo, hi, r] } else { [r, lo, hi] };
    }

    for i in 0..3 {
        let lo = if i > 0 { roots[i] - roots[i - 1] } else { f64::INFINITY };
        let hi = if i < 2 { roots[i + 1] - roots[i] } else { f64::INFINITY };
        roots[i] = polish_root(roots[i], 0.25 * lo.min(hi), params);
    }
    Ok(roots)
}

fn polish_root(mut eps: f64, max_step: f64, params: &ModelParams) -> f64 {
    let mut residual = shifted_cubic(eps, params).abs();
    for _ in 0..16 {
        if residual == 0.0 {
            break;
        }
        let slope = shifted_cubic_derivative(eps, params);
        if slope == 0.0 {
            break;
        }
        let step = shifted_cubic(eps, params) / slope;
        if !(step.abs() < max_step) {
            break;
        }
        let candidate = eps - step;
        let candidate_residual = shifted_cubic(candidate, params).abs();
        if candidate_residual >= residual {
            break;
        }
        eps = candidate;
        residual = candidate_residual;
    }
    eps
}

/// `(E_0, E_1, E_2, E_3)`: singlet energy followed by the ascending triplet.
///
/// When `J = 0` and `B_0 = 0` the triplet is threefold degenerate at `J_z`.
pub fn eigenvalues(params: &ModelParams) -> [f64; 4] {
    let singlet = singlet_energy(params);
    let eps = triplet_shifted_roots(params).unwrap_or([0.0; 3]);
    [singlet, eps[0] + params.j_z(), eps[1] + params.j_z(), eps[2] + params.j_z()]
}

pub fn singlet_energy(params: &ModelParams) -> f64 {
    -(params.j_z() + 2.0 * params.j_x())
}

/// One triplet level: energies, real coefficients and diagnostic flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripletSolution {
    /// Level index in `1..=3`.
    pub n: usize,
    pub eps: f64,
    pub energy: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Normalizer of the closed-form coefficients; `0` when they are singular.
    pub d: f64,
    pub fallback_used: bool,
    pub degenerate: bool,
}

impl TripletSolution {
    pub fn coefficients(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    /// Amplitudes in the `(↑↑, ↑↓, ↓↑, ↓↓)` basis at field azimuth `phi`.
    pub fn state(&self, phi: f64) -> StateVector {
        triplet_state(self.a, self.b, self.c, phi)
    }
}

/// Closed-form coefficients `(a, b, c, d)` evaluated at an arbitrary `eps`.
///
/// Returns `None` when `d` falls below the singular threshold, where the
/// formulas turn into `0/0`.
pub fn closed_form_coefficients(eps: f64, params: &ModelParams) -> Option<(f64, f64, f64, f64)> {
    let b0 = params.b0();
    let (s, c) = params.theta().sin_cos();
    let plus = eps + 2.0 * b0 * c;
    let minus = eps - 2.0 * b0 * c;
    // Unnormalized components; `d` is their squared norm. Summing the squares
    // avoids the cancellation of the expanded quartic
    // `2(ε⁴ − 2(1 + 3cos2θ)B_0²ε² + 16B_0⁴cos²θ)` near the poles.
    let raw = [-2.0 * b0 * s * plus, -std::f64::consts::SQRT_2 * plus * minus, -2.0 * b0 * s * minus];
    let d = raw.iter().map(|x| x * x).sum::<f64>();
    if !(d >= SINGULAR_D_TOL * params.scale().powi(4)) {
        return None;
    }
    let root_d = d.sqrt();
    Some((raw[0] / root_d, raw[1] / root_d, raw[2] / root_d, d))
}

/// Coefficients of a nondegenerate level, the closed-form normalizer (`0`
/// when singular) and whether the null-vector route supplied them.
fn level_coefficients(eps: f64, params: &ModelParams) -> ([f64; 3], f64, bool) {
    match closed_form_coefficients(eps, params) {
        Some((a, b, c, d)) => ([a, b, c], d, false),
        None => (null_vector(params, eps), 0.0, true),
    }
}

/// Real symmetric triplet block at `φ = 0`, shifted by `J_z`, in the basis
/// `(|↑↑⟩, (|↑↓⟩+|↓↑⟩)/√2, |↓↓⟩)`.
pub fn shifted_triplet_block(params: &ModelParams) -> [[f64; 3]; 3] {
    let b0 = params.b0();
    let (s, c) = params.theta().sin_cos();
    let off = std::f64::consts::SQRT_2 * b0 * s;
    [
        [2.0 * b0 * c, off, 0.0],
        [off, 2.0 * params.anisotropy(), off],
        [0.0, off, -2.0 * b0 * c],
    ]
}

fn shifted_block_minus(params: &ModelParams, eps: f64) -> [[f64; 3]; 3] {
    let mut m = shifted_triplet_block(params);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= eps;
    }
    m
}

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]
}

fn norm3(u: [f64; 3]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn scaled(u: [f64; 3], k: f64) -> [f64; 3] {
    u.map(|x| x * k)
}

/// First clearly nonzero component made positive.
fn fix_gauge(u: [f64; 3]) -> [f64; 3] {
    let tol = 1e-12 * norm3(u);
    match u.iter().find(|x| x.abs() > tol) {
        Some(&x) if x < 0.0 => scaled(u, -1.0),
        _ => u,
    }
}

/// Null vector of the rank-2 matrix `block − eps·I`.
fn null_vector(params: &ModelParams, eps: f64) -> [f64; 3] {
    let m = shifted_block_minus(params, eps);
    let best = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| cross(m[i], m[j]))
        .max_by(|u, v| norm3(*u).total_cmp(&norm3(*v)))
        .unwrap();
    let n = norm3(best);
    if n == 0.0 {
        // Only reachable when the block is a multiple of the identity.
        return [1.0, 0.0, 0.0];
    }
    fix_gauge(scaled(best, 1.0 / n))
}

/// Orthonormal basis of the two-dimensional null space of `block − eps·I`
/// (double root).
fn null_plane(params: &ModelParams, eps: f64) -> [[f64; 3]; 2] {
    let m = shifted_block_minus(params, eps);
    let row = *m.iter().max_by(|u, v| norm3(**u).total_cmp(&norm3(**v))).unwrap();
    let rn = norm3(row);
    if rn == 0.0 {
        return [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let r = scaled(row, 1.0 / rn);
    let axis = (0..3)
        .min_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs()))
        .unwrap();
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let u = cross(r, e);
    let u = scaled(u, 1.0 / norm3(u));
    let w = cross(r, u);
    [fix_gauge(u), fix_gauge(w)]
}

/// The full spectrum: singlet energy and the three triplet levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub params: ModelParams,
    pub singlet_energy: f64,
    pub triplets: [TripletSolution; 3],
}

impl Spectrum {
    pub fn triplet(&self, n: usize) -> Result<&TripletSolution> {
        match n {
            1..=3 => Ok(&self.triplets[n - 1]),
            _ => Err(Error::LevelOutOfRange(n)),
        }
    }

    pub fn energies(&self) -> [f64; 4] {
        let t = &self.triplets;
        [self.singlet_energy, t[0].energy, t[1].energy, t[2].energy]
    }

    /// Smallest distance from level `n` (0..=3) to any other level.
    pub fn gap(&self, n: usize) -> f64 {
        let e = self.energies();
        (0..4).filter(|&m| m != n).map(|m| (e[m] - e[n]).abs()).fold(f64::INFINITY, f64::min)
    }

    /// Smallest distance from triplet level `n` to the other triplet levels.
    pub fn triplet_gap(&self, n: usize) -> f64 {
        (1..=3)
            .filter(|&m| m != n)
            .map(|m| (self.triplets[m - 1].eps - self.triplets[n - 1].eps).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solves every level. Degenerate triplet pairs are flagged and receive an
/// arbitrary orthonormal basis of their eigenspace.
pub fn solve(params: &ModelParams) -> Result<Spectrum> {
    let eps = triplet_shifted_roots(params)?;
    let tol = DEGENERACY_TOL * params.scale();
    let degenerate = [
        eps[1] - eps[0] < tol,
        eps[1] - eps[0] < tol || eps[2] - eps[1] < tol,
        eps[2] - eps[1] < tol,
    ];

    let mut coeffs = [[0.0; 3]; 3];
    let mut norms = [0.0; 3];
    let mut fallback = [false; 3];
    let mut i = 0;
    while i < 3 {
        if i < 2 && degenerate[i] && degenerate[i + 1] && eps[i + 1] - eps[i] < tol {
            let plane = null_plane(params, 0.5 * (eps[i] + eps[i + 1]));
            coeffs[i] = plane[0];
            coeffs[i + 1] = plane[1];
            fallback[i] = true;
            fallback[i + 1] = true;
            i += 2;
            continue;
        }
        (coeffs[i], norms[i], fallback[i]) = level_coefficients(eps[i], params);
        i += 1;
    }

    let triplets = [0, 1, 2].map(|i| TripletSolution {
        n: i + 1,
        eps: eps[i],
        energy: eps[i] + params.j_z(),
        a: coeffs[i][0],
        b: coeffs[i][1],
        c: coeffs[i][2],
        d: norms[i],
        fallback_used: fallback[i],
        degenerate: degenerate[i],
    });
    Ok(Spectrum { params: *params, singlet_energy: singlet_energy(params), triplets })
}

/// Coefficients of the triplet level whose energy is `eps`.
///
/// `eps` must be a root of [`shifted_cubic`] to within `1e−9·scale³`; the level
/// it belongs to must be nondegenerate.
pub fn triplet_coefficients(eps: f64, params: &ModelParams) -> Result<TripletSolution> {
    let scale = params.scale();
    let residual = shifted_cubic(eps, params);
    if !(residual.abs() <= ROOT_TOL * scale.powi(3)) {
        return Err(Error::NotARoot { eps, residual });
    }
    let spectrum = solve(params)?;
    let nearest = spectrum
        .triplets
        .iter()
        .min_by(|x, y| (x.eps - eps).abs().total_cmp(&(y.eps - eps).abs()))
        .unwrap();
    if nearest.degenerate {
        return Err(Error::DegenerateSpectrum { level: nearest.n, gap: spectrum.triplet_gap(nearest.n) });
    }
    let (coeffs, d, fallback_used) = level_coefficients(eps, params);
    Ok(TripletSolution {
        n: nearest.n,
        eps,
        energy: eps + params.j_z(),
        a: coeffs[0],
        b: coeffs[1],
        c: coeffs[2],
        d,
        fallback_used,
        degenerate: false,
    })
}

/// Four complex amplitudes ordered `(↑↑, ↑↓, ↓↑, ↓↓)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector(pub [Complex64; 4]);

impl StateVector {
    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> StateVector {
        let n = self.norm();
        StateVector(self.0.map(|z| z / n))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn singlet() -> StateVector {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        StateVector([zero, h, -h, zero])
    }
}

impl Index<usize> for StateVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

fn triplet_state(a: f64, b: f64, c: f64, phi: f64) -> StateVector {
    let (sin, cos) = phi.sin_cos();
    let down = Complex64::new(cos, -sin);
    let up = Complex64::new(cos, sin);
    let mid = Complex64::new(b * FRAC_1_SQRT_2, 0.0);
    StateVector([down * a, mid, mid, up * c])
}

/// Instantaneous eigenstate of level `n` at azimuth `phi`.
///
/// Levels belonging to a degenerate pair are still returned (one member of an
/// orthonormal basis of the pair); their Berry phase is refused downstream.
pub fn eigenstate(params: &ModelParams, n: usize, phi: f64) -> Result<StateVector> {
    match n {
        0 => Ok(StateVector::singlet()),
        1..=3 => Ok(solve(params)?.triplets[n - 1].state(phi)),
        _ => Err(Error::LevelOutOfRange(n)),
    }
}
