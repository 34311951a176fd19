//! Scalars and dense matrices over the real division algebras R, C and H.
//!
//! Every scalar is stored as a quaternion `a + b i + c j + d k`; complex and
//! real scalars simply keep the unused coordinates at zero. Matrices carry
//! the algebra tag, which fixes the real dimension used by traces,
//! determinants and real coordinates.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra as na;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algebra {
    R,
    C,
    H,
}

impl Algebra {
    /// Real dimension of the algebra.
    pub fn dim(self) -> usize {
        match self {
            Algebra::R => 1,
            Algebra::C => 2,
            Algebra::H => 4,
        }
    }

    /// The imaginary units of the algebra (empty for R).
    pub fn units(self) -> Vec<DScalar> {
        match self {
            Algebra::R => vec![],
            Algebra::C => vec![DScalar::I],
            Algebra::H => vec![DScalar::I, DScalar::J, DScalar::K],
        }
    }

    /// Real basis (1, i, j, k) truncated to the algebra.
    pub fn basis(self) -> Vec<DScalar> {
        let mut b = vec![DScalar::ONE];
        b.extend(self.units());
        b
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Algebra::R => "R",
            Algebra::C => "C",
            Algebra::H => "H",
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A quaternion `q[0] + q[1] i + q[2] j + q[3] k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DScalar(pub [f64; 4]);

impl DScalar {
    pub const ZERO: DScalar = DScalar([0.0; 4]);
    pub const ONE: DScalar = DScalar([1.0, 0.0, 0.0, 0.0]);
    pub const I: DScalar = DScalar([0.0, 1.0, 0.0, 0.0]);
    pub const J: DScalar = DScalar([0.0, 0.0, 1.0, 0.0]);
    pub const K: DScalar = DScalar([0.0, 0.0, 0.0, 1.0]);

    pub fn real(a: f64) -> Self {
        DScalar([a, 0.0, 0.0, 0.0])
    }

    pub fn complex(a: f64, b: f64) -> Self {
        DScalar([a, b, 0.0, 0.0])
    }

    pub fn quat(a: f64, b: f64, c: f64, d: f64) -> Self {
        DScalar([a, b, c, d])
    }

    /// Builds a scalar of `alg` from its real coordinates.
    pub fn from_coords(alg: Algebra, coords: &[f64]) -> Self {
        let mut q = [0.0; 4];
        q[..alg.dim()].copy_from_slice(&coords[..alg.dim()]);
        DScalar(q)
    }

    pub fn coords(&self, alg: Algebra) -> &[f64] {
        &self.0[..alg.dim()]
    }

    pub fn re(&self) -> f64 {
        self.0[0]
    }

    pub fn conj(&self) -> Self {
        let q = self.0;
        DScalar([q[0], -q[1], -q[2], -q[3]])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn abs(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let q = self.0;
        DScalar([s * q[0], s * q[1], s * q[2], s * q[3]])
    }

    pub fn inv(&self) -> Self {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0.0; 4]
    }

    /// True when the scalar has no coordinates outside `alg`.
    pub fn lies_in(&self, alg: Algebra, tol: f64) -> bool {
        self.0[alg.dim()..].iter().all(|x| x.abs() <= tol)
    }

    /// Matrix of left multiplication `y -> self * y` in the basis of `alg`.
    pub fn left_matrix(&self, alg: Algebra) -> na::DMatrix<f64> {
        let n = alg.dim();
        let basis = alg.basis();
        na::DMatrix::from_fn(n, n, |r, c| (*self * basis[c]).0[r])
    }
}

impl Add for DScalar {
    type Output = DScalar;
    fn add(self, o: DScalar) -> DScalar {
        let (a, b) = (self.0, o.0);
        DScalar([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl AddAssign for DScalar {
    fn add_assign(&mut self, o: DScalar) {
        *self = *self + o;
    }
}

impl Sub for DScalar {
    type Output = DScalar;
    fn sub(self, o: DScalar) -> DScalar {
        let (a, b) = (self.0, o.0);
        DScalar([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl Neg for DScalar {
    type Output = DScalar;
    fn neg(self) -> DScalar {
        self.scale(-1.0)
    }
}

impl Mul for DScalar {
    type Output = DScalar;
    fn mul(self, o: DScalar) -> DScalar {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = o.0;
        DScalar([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }
}

impl Mul<f64> for DScalar {
    type Output = DScalar;
    fn mul(self, s: f64) -> DScalar {
        self.scale(s)
    }
}

/// Dense row-major matrix over a division algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct DMatrix {
    alg: Algebra,
    rows: usize,
    cols: usize,
    data: Vec<DScalar>,
}

impl DMatrix {
    pub fn zeros(alg: Algebra, rows: usize, cols: usize) -> Self {
        DMatrix { alg, rows, cols, data: vec![DScalar::ZERO; rows * cols] }
    }

    pub fn identity(alg: Algebra, n: usize) -> Self {
        let mut m = Self::zeros(alg, n, n);
        for i in 0..n {
            m.set(i, i, DScalar::ONE);
        }
        m
    }

    pub fn from_fn(alg: Algebra, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> DScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DMatrix { alg, rows, cols, data }
    }

    /// Real matrix (entries of `m` are taken as real scalars).
    pub fn from_real(alg: Algebra, m: &na::DMatrix<f64>) -> Self {
        Self::from_fn(alg, m.nrows(), m.ncols(), |r, c| DScalar::real(m[(r, c)]))
    }

    /// A matrix with a single non-zero entry `s` at `(r, c)`.
    pub fn elementary(alg: Algebra, rows: usize, cols: usize, r: usize, c: usize, s: DScalar) -> Self {
        let mut m = Self::zeros(alg, rows, cols);
        m.set(r, c, s);
        m
    }

    pub fn algebra(&self) -> Algebra {
        self.alg
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> DScalar {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, s: DScalar) {
        self.data[r * self.cols + c] = s;
    }

    pub fn entries(&self) -> &[DScalar] {
        &self.data
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.alg, self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        Self::from_fn(self.alg, self.rows, self.cols, |r, c| self.get(r, c).conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| x.scale(s))
    }

    pub fn map(&self, f: impl Fn(DScalar) -> DScalar) -> Self {
        DMatrix { alg: self.alg, rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    /// Left scalar multiplication `s * A`.
    pub fn left_scalar(&self, s: DScalar) -> Self {
        self.map(|x| s * x)
    }

    /// Right scalar multiplication `A * s`.
    pub fn right_scalar(&self, s: DScalar) -> Self {
        self.map(|x| x * s)
    }

    pub fn try_mul(&self, o: &DMatrix) -> Result<DMatrix> {
        if self.cols != o.rows || self.alg != o.alg {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} over {} by {}x{} over {}",
                self.rows, self.cols, self.alg, o.rows, o.cols, o.alg
            )));
        }
        let mut out = DMatrix::zeros(self.alg, self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let idx = r * o.cols + c;
                    out.data[idx] += a * o.get(k, c);
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, o: &DMatrix) -> Result<DMatrix> {
        self.check_same(o)?;
        Ok(self.zip(o, |a, b| a + b))
    }

    pub fn try_sub(&self, o: &DMatrix) -> Result<DMatrix> {
        self.check_same(o)?;
        Ok(self.zip(o, |a, b| a - b))
    }

    fn check_same(&self, o: &DMatrix) -> Result<()> {
        if self.shape() != o.shape() || self.alg != o.alg {
            return Err(Error::Shape(format!(
                "{}x{} over {} vs {}x{} over {}",
                self.rows, self.cols, self.alg, o.rows, o.cols, o.alg
            )));
        }
        Ok(())
    }

    fn zip(&self, o: &DMatrix, f: impl Fn(DScalar, DScalar) -> DScalar) -> DMatrix {
        DMatrix {
            alg: self.alg,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Sum of squared real coordinates of all entries.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().flat_map(|x| x.0).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sum of the diagonal entries.
    pub fn trace(&self) -> Result<DScalar> {
        self.require_square()?;
        Ok((0..self.rows).fold(DScalar::ZERO, |acc, i| acc + self.get(i, i)))
    }

    /// Trace of the real embedding: `dim_R(D) * Re(tr A)`.
    pub fn trace_real(&self) -> Result<f64> {
        Ok(self.alg.dim() as f64 * self.trace()?.re())
    }

    /// Determinant of the real embedding.
    pub fn det_real(&self) -> Result<f64> {
        self.require_square()?;
        Ok(self.real_embedding().determinant())
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(())
    }

    /// Each entry expands to its left-multiplication matrix.
    pub fn real_embedding(&self) -> na::DMatrix<f64> {
        let n = self.alg.dim();
        let mut m = na::DMatrix::zeros(self.rows * n, self.cols * n);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let block = self.get(r, c).left_matrix(self.alg);
                m.view_mut((r * n, c * n), (n, n)).copy_from(&block);
            }
        }
        m
    }

    /// Inverse of `real_embedding`, reading the first column of each block.
    pub fn from_real_embedding(alg: Algebra, m: &na::DMatrix<f64>) -> Result<DMatrix> {
        let n = alg.dim();
        if m.nrows() % n != 0 || m.ncols() % n != 0 {
            return Err(Error::Shape(format!("{}x{} is not a {} embedding", m.nrows(), m.ncols(), alg)));
        }
        Ok(Self::from_fn(alg, m.nrows() / n, m.ncols() / n, |r, c| {
            let col: Vec<f64> = (0..n).map(|i| m[(r * n + i, c * n)]).collect();
            DScalar::from_coords(alg, &col)
        }))
    }

    /// Real coordinates of all entries, row-major, `dim_R(D)` per entry.
    pub fn to_real_vec(&self) -> Vec<f64> {
        self.data.iter().flat_map(|x| x.coords(self.alg).to_vec()).collect()
    }

    pub fn from_real_vec(alg: Algebra, rows: usize, cols: usize, v: &[f64]) -> Result<DMatrix> {
        let n = alg.dim();
        if v.len() != rows * cols * n {
            return Err(Error::Shape(format!("expected {} coordinates, got {}", rows * cols * n, v.len())));
        }
        Ok(DMatrix { alg, rows, cols, data: v.chunks(n).map(|c| DScalar::from_coords(alg, c)).collect() })
    }

    /// Copy of the block with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> DMatrix {
        Self::from_fn(self.alg, rows, cols, |r, c| self.get(r0 + r, c0 + c))
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &DMatrix) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self.set(r0 + r, c0 + c, b.get(r, c));
            }
        }
    }

    pub fn inverse(&self) -> Result<DMatrix> {
        self.require_square()?;
        let inv = self
            .real_embedding()
            .try_inverse()
            .ok_or_else(|| Error::Singular("matrix is not invertible".into()))?;
        DMatrix::from_real_embedding(self.alg, &inv)
    }

    /// Matrix exponential, computed on the real embedding.
    pub fn exp(&self) -> Result<DMatrix> {
        self.require_square()?;
        DMatrix::from_real_embedding(self.alg, &self.real_embedding().exp())
    }

    /// Rank over R of the real embedding.
    pub fn real_rank(&self, rel_tol: f64) -> usize {
        crate::linalg::numerical_rank(&self.real_embedding(), rel_tol)
    }

    pub fn is_skew_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| (self.get(r, c) + self.get(c, r).conj()).max_coord() <= tol))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| (self.get(r, c) - self.get(c, r).conj()).max_coord() <= tol))
    }
}

impl DScalar {
    fn max_coord(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for &DMatrix {
    type Output = DMatrix;
    fn add(self, o: &DMatrix) -> DMatrix {
        self.try_add(o).expect("matrix addition")
    }
}

impl Sub for &DMatrix {
    type Output = DMatrix;
    fn sub(self, o: &DMatrix) -> DMatrix {
        self.try_sub(o).expect("matrix subtraction")
    }
}

impl Mul for &DMatrix {
    type Output = DMatrix;
    fn mul(self, o: &DMatrix) -> DMatrix {
        self.try_mul(o).expect("matrix product")
    }
}

impl Neg for &DMatrix {
    type Output = DMatrix;
    fn neg(self) -> DMatrix {
        self.scale(-1.0)
    }
}

/// Real dimensions `(dim H_k(D), dim SH_k(D))` of hermitian and
/// skew-hermitian `k x k` matrices.
pub fn herm_skew_dims(alg: Algebra, k: usize) -> (usize, usize) {
    let n = alg.dim();
    let off = n * k * (k.saturating_sub(1)) / 2;
    (off + k, off + (n - 1) * k)
}

/// Orthonormal basis (for `B(X, Y) = tr_R(X* Y)`) of the skew-hermitian
/// `k x k` matrices: `(E_pq - E_qp)/sqrt2`, `g(E_pq + E_qp)/sqrt2`, `g E_pp`.
pub fn skew_hermitian_basis(alg: Algebra, k: usize) -> Vec<DMatrix> {
    let norm = 1.0 / (alg.dim() as f64).sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for p in 0..k {
        for q in p + 1..k {
            let mut m = DMatrix::zeros(alg, k, k);
            m.set(p, q, DScalar::real(s2 * norm));
            m.set(q, p, DScalar::real(-s2 * norm));
            out.push(m);
            for g in alg.units() {
                let mut m = DMatrix::zeros(alg, k, k);
                m.set(p, q, g.scale(s2 * norm));
                m.set(q, p, g.scale(s2 * norm));
                out.push(m);
            }
        }
    }
    for p in 0..k {
        for g in alg.units() {
            out.push(DMatrix::elementary(alg, k, k, p, p, g.scale(norm)));
        }
    }
    out
}

/// Orthonormal basis of the hermitian `k x k` matrices.
pub fn hermitian_basis(alg: Algebra, k: usize) -> Vec<DMatrix> {
    let norm = 1.0 / (alg.dim() as f64).sqrt();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for p in 0..k {
        out.push(DMatrix::elementary(alg, k, k, p, p, DScalar::real(norm)));
    }
    for p in 0..k {
        for q in p + 1..k {
            let mut m = DMatrix::zeros(alg, k, k);
            m.set(p, q, DScalar::real(s2 * norm));
            m.set(q, p, DScalar::real(s2 * norm));
            out.push(m);
            for g in alg.units() {
                let mut m = DMatrix::zeros(alg, k, k);
                m.set(p, q, g.scale(s2 * norm));
                m.set(q, p, g.scale(-s2 * norm));
                out.push(m);
            }
        }
    }
    out
}

/// Orthonormal basis of all `rows x cols` matrices: `g E_pq / sqrt(dim D)`.
pub fn matrix_basis(alg: Algebra, rows: usize, cols: usize) -> Vec<DMatrix> {
    let norm = 1.0 / (alg.dim() as f64).sqrt();
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            for g in alg.basis() {
                out.push(DMatrix::elementary(alg, rows, cols, r, c, g.scale(norm)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_table() {
        let (i, j, k) = (DScalar::I, DScalar::J, DScalar::K);
        assert_eq!(i * j, k);
        assert_eq!(j * k, i);
        assert_eq!(k * i, j);
        assert_eq!(j * i, -k);
        for u in [i, j, k] {
            assert_eq!(u * u, -DScalar::ONE);
        }
    }

    #[test]
    fn traces_and_determinants() {
        let a = DMatrix::from_fn(Algebra::C, 1, 1, |_, _| DScalar::complex(3.0, 4.0));
        assert_eq!(a.trace_real().unwrap(), 6.0);
        assert!((a.det_real().unwrap() - 25.0).abs() < 1e-12);
        let q = DMatrix::identity(Algebra::H, 1);
        assert_eq!(q.trace_real().unwrap(), 4.0);
        assert!((q.scale(2.0).det_real().unwrap() - 16.0).abs() < 1e-12);
        assert_eq!(DMatrix::identity(Algebra::R, 2).trace_real().unwrap(), 2.0);
        let rect = DMatrix::zeros(Algebra::R, 2, 3);
        assert!(matches!(rect.trace_real(), Err(Error::NotSquare { .. })));
        assert!(rect.det_real().is_err());
    }

    #[test]
    fn dims() {
        assert_eq!(herm_skew_dims(Algebra::R, 2), (3, 1));
        assert_eq!(herm_skew_dims(Algebra::C, 1), (1, 1));
        for alg in [Algebra::R, Algebra::C, Algebra::H] {
            assert_eq!(herm_skew_dims(alg, 0), (0, 0));
            for k in 0..=6 {
                let (h, sh) = herm_skew_dims(alg, k);
                assert_eq!(h + sh, k * k * alg.dim());
                let expect = match alg {
                    Algebra::R => k * k.saturating_sub(1),
                    Algebra::C => 2 * k * k,
                    Algebra::H => 2 * k * (2 * k + 1),
                };
                assert_eq!(2 * sh, expect);
                assert_eq!(skew_hermitian_basis(alg, k).len(), sh);
                assert_eq!(hermitian_basis(alg, k).len(), h);
            }
        }
    }

    #[test]
    fn embedding_roundtrip() {
        let m = DMatrix::from_fn(Algebra::H, 2, 3, |r, c| DScalar::quat(r as f64, c as f64, 1.0, -2.0));
        let back = DMatrix::from_real_embedding(Algebra::H, &m.real_embedding()).unwrap();
        assert_eq!(m, back);
        let v = m.to_real_vec();
        assert_eq!(DMatrix::from_real_vec(Algebra::H, 2, 3, &v).unwrap(), m);
    }
}
