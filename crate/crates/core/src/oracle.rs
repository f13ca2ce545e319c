//! Brute-force ground truth that never touches the closed-form route.
//!
//! The 4×4 Hamiltonian is built explicitly and diagonalized with cyclic complex
//! Jacobi rotations. Berry phases come either from the φ-dependence of the
//! `|↑↑⟩`/`|↓↓⟩` weights or from a discrete Wilson loop; the concurrence comes
//! from the `σʸ⊗σʸ` spin flip applied to the conjugated ket.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;

use crate::spectrum::StateVector;
use crate::{wrap_angle, Error, ModelParams, Result};

type Matrix4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// fraction of the full norm.
pub const JACOBI_TOL: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 64;
/// Relative gap below which oracle levels are treated as degenerate.
pub const GAP_TOL: f64 = 1e-8;

/// Hermitian 4×4 matrix in the `(↑↑, ↑↓, ↓↑, ↓↓)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix4 {
    entries: Matrix4,
}

impl HermitianMatrix4 {
    /// Builds from the upper triangle; the lower triangle is mirrored and the
    /// diagonal made real.
    pub fn from_upper(entries: Matrix4) -> Self {
        let mut m = entries;
        for i in 0..4 {
            m[i][i] = Complex64::new(m[i][i].re, 0.0);
            for j in 0..i {
                m[i][j] = m[j][i].conj();
            }
        }
        Self { entries: m }
    }

    pub fn diagonal(values: [f64; 4]) -> Self {
        let mut m = [[ZERO; 4]; 4];
        for (i, v) in values.iter().enumerate() {
            m[i][i] = Complex64::new(*v, 0.0);
        }
        Self { entries: m }
    }

    pub fn entries(&self) -> &Matrix4 {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        StateVector(matvec(&self.entries, &v.0))
    }

    /// `⟨v|H|v⟩`.
    pub fn expectation(&self, v: &StateVector) -> f64 {
        v.inner(&self.apply(v)).re
    }
}

pub(crate) fn matvec(m: &Matrix4, v: &[Complex64; 4]) -> [Complex64; 4] {
    let mut out = [ZERO; 4];
    for (o, row) in out.iter_mut().zip(m.iter()) {
        *o = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
    }
    out
}

/// `J_x(σˣσˣ + σʸσʸ) + J_z σᶻσᶻ + B_0 (σ₁ + σ₂)·n̂(θ, φ)`.
pub fn hamiltonian(params: &ModelParams, phi: f64) -> HermitianMatrix4 {
    let (s, c) = params.theta().sin_cos();
    let (jx, jz, b0) = (params.j_x(), params.j_z(), params.b0());
    let t = Complex64::from_polar(b0 * s, -phi);
    let re = |x: f64| Complex64::new(x, 0.0);
    HermitianMatrix4::from_upper([
        [re(jz + 2.0 * b0 * c), t, t, ZERO],
        [ZERO, re(-jz), re(2.0 * jx), t],
        [ZERO, ZERO, re(-jz), t],
        [ZERO, ZERO, ZERO, re(jz - 2.0 * b0 * c)],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigDecomposition {
    /// Ascending.
    pub values: [f64; 4],
    pub vectors: [StateVector; 4],
    /// `max_k ‖H v_k − λ_k v_k‖`.
    pub residual: f64,
    pub sweeps: usize,
}

fn off_norm(m: &Matrix4) -> f64 {
    let mut s = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            if i != j {
                s += z.norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Applies the unitary plane rotation `U` acting on indices `(p, q)`:
/// `m ← U† m U`, `v ← v U`.
fn rotate(m: &mut Matrix4, v: &mut Matrix4, p: usize, q: usize) {
    let h = m[p][q];
    let g = h.norm();
    if g == 0.0 {
        return;
    }
    let (a, b) = (m[p][p].re, m[q][q].re);
    let tau = (b - a) / (2.0 * g);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let phase = h.conj() / g;
    // U restricted to (p, q): [[cs, sn], [-sn·phase, cs·phase]].
    let (upp, upq, uqp, uqq) = (Complex64::new(cs, 0.0), Complex64::new(sn, 0.0), -phase * sn, phase * cs);

    // m ← m U (columns p, q).
    for row in m.iter_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = x * upp + y * uqp;
        row[q] = x * upq + y * uqq;
    }
    // m ← U† m (rows p, q).
    let (rp, rq) = (m[p], m[q]);
    for k in 0..4 {
        m[p][k] = upp.conj() * rp[k] + uqp.conj() * rq[k];
        m[q][k] = upq.conj() * rp[k] + uqq.conj() * rq[k];
    }
    m[p][q] = ZERO;
    m[q][p] = ZERO;
    m[p][p] = Complex64::new(m[p][p].re, 0.0);
    m[q][q] = Complex64::new(m[q][q].re, 0.0);

    for row in v.iter_mut() {
        let (x, y) = (row[p], row[q]);
        row[p] = x * upp + y * uqp;
        row[q] = x * upq + y * uqq;
    }
}

/// Cyclic complex Jacobi diagonalization.
pub fn eigh(h: &HermitianMatrix4) -> Result<EigDecomposition> {
    let norm = h.frobenius_norm();
    let mut m = h.entries;
    let mut v = [[ZERO; 4]; 4];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = ONE;
    }

    let mut sweeps = 0;
    while off_norm(&m) > JACOBI_TOL * norm {
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure { off_norm: off_norm(&m) });
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order = [0, 1, 2, 3];
    order.sort_by(|&i, &j| m[i][i].re.total_cmp(&m[j][j].re));
    let values = order.map(|k| m[k][k].re);
    let vectors = order.map(|k| StateVector([v[0][k], v[1][k], v[2][k], v[3][k]]).normalized());

    let residual = values
        .iter()
        .zip(vectors.iter())
        .map(|(lambda, vec)| {
            let hv = h.apply(vec);
            hv.0.iter().zip(vec.0.iter()).map(|(x, y)| (x - y * lambda).norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);

    Ok(EigDecomposition { values, vectors, residual, sweeps })
}

/// `|⟨ψ|σʸ⊗σʸ|ψ*⟩| = |−2ψ₁ψ₄ + 2ψ₂ψ₃|`.
pub fn concurrence_numeric(v: &StateVector) -> Result<f64> {
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NormError { norm });
    }
    let flip = [-ONE, ONE, ONE, -ONE];
    // σʸ⊗σʸ is anti-diagonal with entries (−1, 1, 1, −1).
    let overlap: Complex64 = (0..4).map(|i| v[i].conj() * flip[i] * v[3 - i].conj()).sum();
    Ok(overlap.norm())
}

/// Eigen-decomposition with the singlet separated from the triplet sector.
///
/// The triplet vectors are returned in ascending energy.
#[derive(Debug, Clone, Copy)]
pub struct SectorSplit {
    pub singlet_energy: f64,
    pub triplet_values: [f64; 3],
    pub triplet_vectors: [StateVector; 3],
}

fn singlet_weight(v: &StateVector) -> f64 {
    StateVector::singlet().inner(v).norm_sqr()
}

/// Splits a diagonalization into singlet and triplet parts. When the singlet
/// is degenerate with a triplet level the solver may mix them, so the
/// singlet component is projected out of every vector before picking the
/// three with the largest triplet weight.
pub fn split_sectors(h: &HermitianMatrix4) -> Result<SectorSplit> {
    let eig = eigh(h)?;
    let singlet = StateVector::singlet();
    let singlet_energy = h.expectation(&singlet);

    let mut candidates: Vec<(f64, f64, StateVector)> = eig
        .values
        .iter()
        .zip(eig.vectors.iter())
        .map(|(&value, vec)| {
            let overlap = singlet.inner(vec);
            let projected = StateVector([0, 1, 2, 3].map(|i| vec[i] - singlet[i] * overlap));
            (1.0 - singlet_weight(vec), value, projected)
        })
        .collect();
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0));
    candidates.truncate(3);

    // Gram-Schmidt within the kept set, ordered by triplet weight.
    let mut basis: Vec<(f64, StateVector)> = Vec::with_capacity(3);
    for (_, value, vec) in candidates {
        let mut w = vec;
        for (_, u) in &basis {
            let o = u.inner(&w);
            w = StateVector([0, 1, 2, 3].map(|i| w[i] - u[i] * o));
        }
        basis.push((value, w.normalized()));
    }
    basis.sort_by(|x, y| x.0.total_cmp(&y.0));

    Ok(SectorSplit {
        singlet_energy,
        triplet_values: [basis[0].0, basis[1].0, basis[2].0],
        triplet_vectors: [basis[0].1, basis[1].1, basis[2].1],
    })
}

impl SectorSplit {
    /// Vector of level `n` (0 = singlet, 1..=3 ascending triplet).
    pub fn vector(&self, n: usize) -> Result<StateVector> {
        match n {
            0 => Ok(StateVector::singlet()),
            1..=3 => Ok(self.triplet_vectors[n - 1]),
            _ => Err(Error::LevelOutOfRange(n)),
        }
    }

    pub fn triplet_gap(&self, n: usize) -> f64 {
        (1..=3)
            .filter(|&m| m != n)
            .map(|m| (self.triplet_values[m - 1] - self.triplet_values[n - 1]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    fn ensure_nondegenerate(&self, n: usize, scale: f64) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let gap = self.triplet_gap(n);
        if gap < GAP_TOL * scale {
            return Err(Error::DegenerateSpectrum { level: n, gap });
        }
        Ok(())
    }
}

/// `2π(|v_↑↑|² − |v_↓↓|²)` of the diagonalized level `n` at `φ = 0`.
///
/// Rotating the field about z multiplies the `|↑↑⟩` and `|↓↓⟩` amplitudes by
/// `e^{∓iφ}`, so this weight difference is the unwound loop integral.
pub fn berry_unwound_numeric(params: &ModelParams, n: usize) -> Result<f64> {
    if n > 3 {
        return Err(Error::LevelOutOfRange(n));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let split = split_sectors(&hamiltonian(params, 0.0))?;
    split.ensure_nondegenerate(n, params.scale())?;
    let v = split.vector(n)?;
    Ok(TAU * (v[0].norm_sqr() - v[3].norm_sqr()))
}

/// Discrete Pancharatnam phase `−arg Π_k ⟨v_k|v_{k+1}⟩` around `φ ∈ [0, 2π)`.
///
/// Levels are followed by maximum overlap between neighbouring slices. The
/// result lies in `(−π, π]`.
pub fn wilson_loop_phase(params: &ModelParams, n: usize, steps: usize) -> Result<f64> {
    if steps < 16 {
        return Err(Error::InvalidParams(format!("wilson loop needs at least 16 steps, got {steps}")));
    }
    if n > 3 {
        return Err(Error::LevelOutOfRange(n));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let scale = params.scale();
    let first = split_sectors(&hamiltonian(params, 0.0))?;
    first.ensure_nondegenerate(n, scale)?;
    let start = first.vector(n)?;

    let mut prev = start;
    let mut product = ONE;
    for k in 1..steps {
        let phi = TAU * k as f64 / steps as f64;
        let split = split_sectors(&hamiltonian(params, phi))?;
        let (overlap, next) = split
            .triplet_vectors
            .iter()
            .map(|v| (prev.inner(v), *v))
            .max_by(|x, y| x.0.norm().total_cmp(&y.0.norm()))
            .unwrap();
        if overlap.norm() < 0.5 {
            return Err(Error::DegenerateSpectrum { level: n, gap: split.triplet_gap(n) });
        }
        product *= overlap;
        prev = next;
    }
    let closing = prev.inner(&start);
    if closing.norm() < 0.5 {
        return Err(Error::DegenerateSpectrum { level: n, gap: first.triplet_gap(n) });
    }
    product *= closing;
    Ok(wrap_angle(-product.arg()))
}

/// Single-spin eigenbasis along `n̂(θ, φ)`:
/// `χ₊ = (e^{−iφ} cos(θ/2), sin(θ/2))`, `χ₋ = (−sin(θ/2), e^{iφ} cos(θ/2))`.
pub fn rotated_basis(theta: f64, phi: f64) -> ([Complex64; 2], [Complex64; 2]) {
    let (s, c) = (theta / 2.0).sin_cos();
    let plus = [Complex64::from_polar(c, -phi), Complex64::new(s, 0.0)];
    let minus = [Complex64::new(-s, 0.0), Complex64::from_polar(c, phi)];
    (plus, minus)
}

/// `|u⟩ ⊗ |w⟩` in the `(↑↑, ↑↓, ↓↑, ↓↓)` ordering.
pub fn product_state(u: [Complex64; 2], w: [Complex64; 2]) -> StateVector {
    StateVector([u[0] * w[0], u[0] * w[1], u[1] * w[0], u[1] * w[1]])
}

/// `(|u w⟩ + |w u⟩)/√2`.
pub fn symmetrized(u: [Complex64; 2], w: [Complex64; 2]) -> StateVector {
    let x = product_state(u, w);
    let y = product_state(w, u);
    StateVector([0, 1, 2, 3].map(|i| (x[i] + y[i]) * FRAC_1_SQRT_2))
}
