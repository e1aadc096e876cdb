//! Small dense complex-matrix kernel.
//!
//! Dimensions in this crate never exceed 12, so everything is a plain
//! row-major `Vec<Complex64>` with O(n³) routines. Hermitian problems go
//! through a cyclic Jacobi eigensolver; the non-Hermitian decay path uses
//! scaling-and-squaring on a Taylor series.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{contract, Result};

/// Tolerance used when checking Hermiticity of a generator.
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if the length is not a square.
    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "row-major data must have dim² entries");
        Self { dim, data }
    }

    pub fn from_real_rows(dim: usize, data: &[f64]) -> Self {
        Self::from_rows(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Principal submatrix on the listed indices, in the listed order.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let d = idx.len();
        let mut out = Self::zeros(d);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest elementwise deviation of `self` from its adjoint.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// `max|U†U − I|` elementwise.
    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    fn one_norm(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for CMatrix {
    /// Rows of `[re, im]` pairs.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Eigen-data of a 2×2 Hermitian block
/// `[[V₁, V_e e^{−iβ₀}], [V_e e^{iβ₀}, V₂]]`.
///
/// The eigenvectors are `|λ₊⟩ = η₁|1⟩ + η₂ e^{iβ₀}|2⟩` and
/// `|λ₋⟩ = η₂ e^{−iβ₀}|1⟩ − η₁|2⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralData {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub eta1: f64,
    pub eta2: f64,
    /// Half-splitting `V̄ = sqrt(V_e² + (V₁−V₂)²/4)`.
    pub vbar: f64,
    /// The phase β₀ the eigenvectors refer to.
    pub phase: f64,
}

impl SpectralData {
    /// Closed-form spectrum from the real parameters of the block. `ve` may be negative.
    pub fn from_parts(v1: f64, v2: f64, ve: f64, beta0: f64) -> Self {
        let half_gap = 0.5 * (v1 - v2);
        let vbar = ve.hypot(half_gap);
        let mean = 0.5 * (v1 + v2);
        let (eta1, eta2) = if ve == 0.0 {
            if v2 > v1 {
                (0.0, 1.0)
            } else {
                (1.0, 0.0)
            }
        } else if v2 >= v1 {
            // η₁:η₂ = V_e : (V̄ + (V₂−V₁)/2), cancellation-free for V₂ ≥ V₁
            let (a, b) = (ve, vbar - half_gap);
            let n = a.hypot(b);
            (a / n, b / n)
        } else {
            let (a, b) = (vbar + half_gap, ve);
            let n = a.hypot(b);
            (a / n, b / n)
        };
        Self {
            lambda_plus: mean + vbar,
            lambda_minus: mean - vbar,
            eta1,
            eta2,
            vbar,
            phase: beta0,
        }
    }

    /// `(|λ₊⟩, |λ₋⟩)` as coordinate pairs.
    pub fn eigenvectors(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let e = Complex64::from_polar(1.0, self.phase);
        let plus = [Complex64::new(self.eta1, 0.0), e * self.eta2];
        let minus = [e.conj() * self.eta2, Complex64::new(-self.eta1, 0.0)];
        (plus, minus)
    }

    /// `λ₊|λ₊⟩⟨λ₊| + λ₋|λ₋⟩⟨λ₋|`.
    pub fn reconstruct(&self) -> CMatrix {
        let (p, m) = self.eigenvectors();
        let mut out = CMatrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] =
                    p[i] * p[j].conj() * self.lambda_plus + m[i] * m[j].conj() * self.lambda_minus;
            }
        }
        out
    }
}

/// Closed-form eigendecomposition of a 2×2 Hermitian block.
pub fn eig2(block: &CMatrix) -> Result<SpectralData> {
    if block.dim() != 2 {
        return Err(contract(format!("eig2 expects a 2x2 block, got {}", block.dim())));
    }
    let defect = block.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(contract(format!("eig2 input is not Hermitian (defect {defect:.3e})")));
    }
    let v1 = block[(0, 0)].re;
    let v2 = block[(1, 1)].re;
    let off = block[(0, 1)];
    Ok(SpectralData::from_parts(v1, v2, off.norm(), -off.arg()))
}

/// Eigendecomposition of a Hermitian matrix: eigenvalues ascending and the
/// unitary whose columns are the matching eigenvectors.
pub fn hermitian_eigen(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(contract(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    if !h.is_finite() {
        return Err(contract("matrix has non-finite entries"));
    }
    let n = h.dim();
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let scale = h.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vecs[(row, col)] = v[(row, src)];
        }
    }
    Ok((values, vecs))
}

/// One two-sided Jacobi rotation zeroing `a[p][q]`. Accumulates into `v`.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // phase e^{iφ} with a_pq = |a_pq| e^{iφ}; G = diag(1, e^{-iφ}) · R(c, s)
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let t = if tau == 0.0 { 1.0 } else { t };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.dim();
    // A ← A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    // A ← G† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

/// `exp(−iHt)` for Hermitian `H`, built from its eigendecomposition.
pub fn propagate(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(contract(format!("duration must be finite and non-negative, got {t}")));
    }
    let (values, vecs) = hermitian_eigen(h)?;
    let phases: Vec<Complex64> = values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -l * t))
        .collect();
    let d = CMatrix::diagonal(&phases);
    Ok(&(&vecs * &d) * &vecs.adjoint())
}

/// `exp(−iHt)` for an arbitrary (possibly non-Hermitian) generator. Unitarity is not asserted.
pub fn propagate_general(h: &CMatrix, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(contract(format!("duration must be finite and non-negative, got {t}")));
    }
    if !h.is_finite() {
        return Err(contract("generator has non-finite entries"));
    }
    Ok(expm(&h.scale(Complex64::new(0.0, -t))))
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.dim();
    let norm = a.one_norm();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = a.scale(Complex64::new(0.5f64.powi(squarings as i32), 0.0));

    let mut result = CMatrix::identity(n);
    let mut term = CMatrix::identity(n);
    for k in 1..=30 {
        term = (&term * &scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        result = &result + &term;
        if term.max_abs() < 1e-18 * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Average gate fidelity (uniform average over pure inputs) of `actual`
/// against `ideal` on the listed subspace:
/// `F = (Tr(MM†) + |Tr M|²) / (d(d+1))` with `M = P U_ideal† U_actual P`.
///
/// `ideal` is either the full-size matrix or already the `d×d` block.
pub fn avg_gate_fidelity(actual: &CMatrix, ideal: &CMatrix, subspace: &[usize]) -> Result<f64> {
    let d = subspace.len();
    if d == 0 {
        return Err(contract("fidelity subspace must not be empty"));
    }
    if let Some(&bad) = subspace.iter().find(|&&i| i >= actual.dim()) {
        return Err(contract(format!("subspace index {bad} out of range")));
    }
    let a = actual.restrict(subspace);
    let i = if ideal.dim() == d {
        ideal.clone()
    } else {
        if let Some(&bad) = subspace.iter().find(|&&k| k >= ideal.dim()) {
            return Err(contract(format!("subspace index {bad} out of range for ideal")));
        }
        ideal.restrict(subspace)
    };
    let m = &i.adjoint() * &a;
    let tr_mm = (&m * &m.adjoint()).trace().re;
    let tr = m.trace().norm_sqr();
    Ok(((tr_mm + tr) / (d * (d + 1)) as f64).clamp(0.0, 1.0))
}

/// Global phase `e^{iγ}` that best aligns `b` to `a` in the Frobenius sense.
pub fn best_phase(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let overlap: Complex64 = b
        .entries()
        .iter()
        .zip(a.entries())
        .map(|(x, y)| x.conj() * y)
        .sum();
    if overlap.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        overlap / overlap.norm()
    }
}

/// Largest elementwise deviation between `a` and `b` after removing the global phase.
pub fn max_deviation_mod_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    a.max_abs_diff(&b.scale(best_phase(a, b)))
}

/// Frobenius distance between `a` and `b`, minimized over a global phase on `b`.
pub fn frobenius_distance_mod_phase(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - &b.scale(best_phase(a, b))).frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_generator_is_identity() {
        let u = propagate(&CMatrix::zeros(4), 3.7).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn pi_pulse_swaps_with_minus_i() {
        let omega = 2.0 * PI * 30.0;
        let h = CMatrix::from_real_rows(2, &[0.0, omega / 2.0, omega / 2.0, 0.0]);
        let u = propagate(&h, PI / omega).unwrap();
        // |a⟩ → −i|b⟩, |b⟩ → −i|a⟩
        assert!((u[(1, 0)] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((u[(0, 1)] - c(0.0, -1.0)).norm() < 1e-12);
        assert!(u[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let h = CMatrix::from_rows(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(propagate(&h, 1.0).is_err());
        assert!(eig2(&h).is_err());
        assert!(propagate(&CMatrix::zeros(2), -1.0).is_err());
    }

    #[test]
    fn eig2_symmetric_block() {
        let s = SpectralData::from_parts(2.0, 2.0, 0.5, 0.3);
        assert!((s.lambda_plus - 2.5).abs() < 1e-15);
        assert!((s.lambda_minus - 1.5).abs() < 1e-15);
        assert!((s.eta1 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s.eta2 - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eig2_diagonal_conventions() {
        let s = SpectralData::from_parts(1.0, 2.0, 0.0, 0.0);
        assert_eq!((s.lambda_plus, s.lambda_minus), (2.0, 1.0));
        assert_eq!((s.eta1, s.eta2), (0.0, 1.0));
        let s = SpectralData::from_parts(2.0, 1.0, 0.0, 0.0);
        assert_eq!((s.eta1, s.eta2), (1.0, 0.0));
    }

    #[test]
    fn eig2_from_matrix_matches_parts() {
        let beta0 = 0.7;
        let (v1, v2, ve) = (1.3, -0.4, 0.9);
        let e = Complex64::from_polar(ve, -beta0);
        let block = CMatrix::from_rows(2, vec![c(v1, 0.0), e, e.conj(), c(v2, 0.0)]);
        let s = eig2(&block).unwrap();
        assert!(s.reconstruct().max_abs_diff(&block) < 1e-12);
        assert!((s.lambda_plus * s.lambda_minus - (v1 * v2 - ve * ve)).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let id = CMatrix::identity(4);
        let all = [0, 1, 2, 3];
        assert!((avg_gate_fidelity(&id, &id, &all).unwrap() - 1.0).abs() < 1e-15);
        let phased = id.scale(Complex64::from_polar(1.0, 1.234));
        assert!((avg_gate_fidelity(&phased, &id, &all).unwrap() - 1.0).abs() < 1e-14);
        let cz = CMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!((avg_gate_fidelity(&cz, &id, &all).unwrap() - 0.4).abs() < 1e-15);
        assert!(avg_gate_fidelity(&id, &id, &[]).is_err());
    }

    #[test]
    fn fidelity_on_embedded_subspace() {
        let big = CMatrix::identity(12);
        let small = CMatrix::identity(4);
        let f = avg_gate_fidelity(&big, &small, &[0, 1, 4, 5]).unwrap();
        assert!((f - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expm_of_diagonal() {
        let a = CMatrix::diagonal(&[c(1.0, 0.0), c(-2.0, 0.5)]);
        let e = expm(&a);
        assert!((e[(0, 0)] - c(1.0, 0.0).exp()).norm() < 1e-13);
        assert!((e[(1, 1)] - c(-2.0, 0.5).exp()).norm() < 1e-13);
    }
}
