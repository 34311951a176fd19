//! Schwartz test functions of the form `sum poly(y) exp(-pi (y-c)^T Q (y-c))`
//! on `R^n`, with closed-form pairings against imaginary Gaussians.

use nalgebra as na;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};

type CMat = na::DMatrix<Complex64>;
type CVec = na::DVector<Complex64>;

/// One Gaussian times a polynomial. The polynomial is a sum of products of
/// the affine forms `forms[i] . y + offsets[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussPoly {
    pub q: Mat,
    pub center: Vector,
    pub forms: Mat,
    pub offsets: Vector,
    pub poly: Vec<(f64, Vec<usize>)>,
}

impl GaussPoly {
    pub fn gaussian(q: Mat, center: Vector) -> Self {
        let n = q.nrows();
        GaussPoly { q, center, forms: Mat::zeros(0, n), offsets: Vector::zeros(0), poly: vec![(1.0, vec![])] }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn eval(&self, y: &Vector) -> f64 {
        let d = y - &self.center;
        let n = d.len();
        let mut quad = 0.0;
        for c in 0..n {
            let col: f64 = (0..n).map(|r| self.q[(r, c)] * d[r]).sum();
            quad += col * d[c];
        }
        let g = (-std::f64::consts::PI * quad).exp();
        if g == 0.0 {
            return 0.0;
        }
        if self.poly.len() == 1 && self.poly[0].1.is_empty() {
            return self.poly[0].0 * g;
        }
        let l = &self.forms * y + &self.offsets;
        let p: f64 = self.poly.iter().map(|(c, idx)| c * idx.iter().map(|&i| l[i]).product::<f64>()).sum();
        p * g
    }

    /// `int exp(2 pi i y^T S y) g(y) dy`.
    fn pairing(&self, s: &Mat) -> Complex64 {
        let n = self.dim();
        if n == 0 {
            return Complex64::new(self.poly.iter().filter(|(_, i)| i.is_empty()).map(|(c, _)| c).sum(), 0.0);
        }
        let eq = crate::linalg::sym_eigen(self.q.clone());
        let inv_sqrt = &eq.eigenvectors
            * Mat::from_diagonal(&eq.eigenvalues.map(|l| 1.0 / l.sqrt()))
            * eq.eigenvectors.transpose();
        let h = &inv_sqrt * (s * -2.0) * &inv_sqrt;
        let eh = crate::linalg::sym_eigen((&h + h.transpose()) * 0.5);
        let t = &inv_sqrt * &eh.eigenvectors;
        let tc: CMat = t.map(|x| Complex64::new(x, 0.0));
        let diag = CVec::from_iterator(n, eh.eigenvalues.iter().map(|&e| Complex64::new(1.0, e).inv()));
        // A^{-1} with A = Q - 2 i S.
        let a_inv = &tc * CMat::from_diagonal(&diag) * tc.transpose();
        let mut det_factor = Complex64::new(1.0, 0.0);
        for (&l, &e) in eq.eigenvalues.iter().zip(eh.eigenvalues.iter()) {
            det_factor /= Complex64::new(l, 0.0).sqrt() * Complex64::new(1.0, e).sqrt();
        }
        let b = &self.q * &self.center;
        let bc: CVec = b.map(|x| Complex64::new(x, 0.0));
        let mean: CVec = &a_inv * &bc;
        let quad = self.center.dot(&b);
        let cross: Complex64 = bc.iter().zip(mean.iter()).map(|(x, y)| x * y).sum();
        let constant = (-(Complex64::new(quad, 0.0) - cross) * std::f64::consts::PI).exp();
        let r = self.forms.nrows();
        let mut poly_value = Complex64::new(0.0, 0.0);
        if r == 0 {
            poly_value = Complex64::new(self.poly.iter().map(|(c, _)| c).sum(), 0.0);
        } else {
            let fc: CMat = self.forms.map(|x| Complex64::new(x, 0.0));
            let mu: Vec<Complex64> =
                (0..r).map(|i| fc.row(i).transpose().dot(&mean) + self.offsets[i]).collect();
            let cov: CMat = &fc * (&a_inv / Complex64::new(2.0 * std::f64::consts::PI, 0.0)) * fc.transpose();
            for (c, idx) in &self.poly {
                poly_value += wick(&mu, &cov, idx) * *c;
            }
        }
        det_factor * constant * poly_value
    }
}

/// `E[prod_i X_{idx_i}]` for a (complex) Gaussian with means `mu` and covariance `cov`.
fn wick(mu: &[Complex64], cov: &CMat, idx: &[usize]) -> Complex64 {
    match idx.split_first() {
        None => Complex64::new(1.0, 0.0),
        Some((&first, rest)) => {
            let mut v = mu[first] * wick(mu, cov, rest);
            for j in 0..rest.len() {
                let mut others = rest.to_vec();
                let k = others.remove(j);
                v += cov[(first, k)] * wick(mu, cov, &others);
            }
            v
        }
    }
}

/// A finite sum of [`GaussPoly`] terms on `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub dim: usize,
    pub terms: Vec<GaussPoly>,
}

impl TestFunction {
    pub fn from_terms(terms: Vec<GaussPoly>) -> Result<Self> {
        let dim = terms.first().map(|t| t.dim()).ok_or_else(|| Error::Shape("test function without terms".into()))?;
        for t in &terms {
            let r = t.forms.nrows();
            let ok_idx = t.poly.iter().all(|(_, i)| i.iter().all(|&j| j < r) && i.len() <= 4);
            if t.dim() != dim || t.center.len() != dim || t.forms.ncols() != dim || t.offsets.len() != r || !ok_idx {
                return Err(Error::Shape("inconsistent Gaussian-polynomial term".into()));
            }
            let min_eig = crate::linalg::sym_eigen(t.q.clone()).eigenvalues.min();
            if min_eig <= 0.0 {
                return Err(Error::OutOfRange("Gaussian form must be positive definite".into()));
            }
        }
        Ok(TestFunction { dim, terms })
    }

    /// `exp(-pi (y-c)^T Q (y-c))`.
    pub fn gaussian(q: Mat, center: Vector) -> Result<Self> {
        Self::from_terms(vec![GaussPoly::gaussian(q, center)])
    }

    /// `exp(-pi |y|^2)`, with integral 1.
    pub fn standard(n: usize) -> Self {
        TestFunction { dim: n, terms: vec![GaussPoly::gaussian(Mat::identity(n, n), Vector::zeros(n))] }
    }

    /// Multiplies every term by `sum_c c * prod (forms . y + offsets)`.
    pub fn with_polynomial(&self, forms: &Mat, offsets: &Vector, poly: &[(f64, Vec<usize>)]) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let r0 = t.forms.nrows();
                let mut f = Mat::zeros(r0 + forms.nrows(), self.dim);
                f.view_mut((0, 0), (r0, self.dim)).copy_from(&t.forms);
                f.view_mut((r0, 0), (forms.nrows(), self.dim)).copy_from(forms);
                let mut o = Vector::zeros(r0 + offsets.len());
                o.rows_mut(0, r0).copy_from(&t.offsets);
                o.rows_mut(r0, offsets.len()).copy_from(offsets);
                let mut p = Vec::new();
                for (c1, i1) in &t.poly {
                    for (c2, i2) in poly {
                        let mut idx = i1.clone();
                        idx.extend(i2.iter().map(|i| i + r0));
                        p.push((c1 * c2, idx));
                    }
                }
                GaussPoly { q: t.q.clone(), center: t.center.clone(), forms: f, offsets: o, poly: p }
            })
            .collect();
        Self::from_terms(terms)
    }

    pub fn eval(&self, y: &Vector) -> f64 {
        self.terms.iter().map(|t| t.eval(y)).sum()
    }

    pub fn eval_slice(&self, y: &[f64]) -> f64 {
        self.eval(&Vector::from_column_slice(y))
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            for (a, _) in &mut t.poly {
                *a *= c;
            }
        }
        out
    }

    pub fn add(&self, other: &TestFunction) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("adding test functions on R^{} and R^{}", self.dim, other.dim)));
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(TestFunction { dim: self.dim, terms })
    }

    /// `y -> t^n phi(t y)`.
    pub fn dilate(&self, t: f64) -> Self {
        let tn = t.powi(self.dim as i32);
        let terms = self
            .terms
            .iter()
            .map(|g| GaussPoly {
                q: &g.q * (t * t),
                center: &g.center / t,
                forms: &g.forms * t,
                offsets: g.offsets.clone(),
                poly: g.poly.iter().map(|(c, i)| (c * tn, i.clone())).collect(),
            })
            .collect();
        TestFunction { dim: self.dim, terms }
    }

    /// `y -> phi(g y)` for invertible `g`.
    pub fn compose(&self, g: &Mat) -> Result<Self> {
        let gi = g.clone().try_inverse().ok_or_else(|| Error::Singular("compose with a singular map".into()))?;
        let terms = self
            .terms
            .iter()
            .map(|t| GaussPoly {
                q: g.transpose() * &t.q * g,
                center: &gi * &t.center,
                forms: &t.forms * g,
                offsets: t.offsets.clone(),
                poly: t.poly.clone(),
            })
            .collect();
        Self::from_terms(terms)
    }

    /// `z -> phi(E z)` for an injective `E: R^m -> R^n` (columns of `e`).
    pub fn restrict(&self, e: &Mat) -> Result<Self> {
        if e.nrows() != self.dim {
            return Err(Error::Shape("restriction map has the wrong target dimension".into()));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let qe = e.transpose() * &t.q * e;
                let qe_inv = qe.clone().try_inverse().ok_or_else(|| Error::Singular("degenerate restriction".into()))?;
                let z0 = &qe_inv * (e.transpose() * (&t.q * &t.center));
                let konst = (-std::f64::consts::PI * (t.center.dot(&(&t.q * &t.center)) - z0.dot(&(&qe * &z0)))).exp();
                Ok(GaussPoly {
                    q: qe,
                    center: z0,
                    forms: &t.forms * e,
                    offsets: t.offsets.clone(),
                    poly: t.poly.iter().map(|(c, i)| (c * konst, i.clone())).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(terms)
    }

    /// `int phi(y) exp(2 pi i y^T S y) dy` for a symmetric `S`.
    pub fn pairing(&self, s: &Mat) -> Complex64 {
        self.terms.iter().map(|t| t.pairing(s)).sum()
    }

    pub fn integral(&self) -> f64 {
        self.pairing(&Mat::zeros(self.dim, self.dim)).re
    }

    /// Smallest eigenvalue of the Gaussian forms over all terms.
    pub fn min_precision(&self) -> f64 {
        self.terms.iter().map(|t| crate::linalg::sym_eigen(t.q.clone()).eigenvalues.min()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_center_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.center.norm()).fold(0.0, f64::max)
    }

    /// Whether every term depends on `y` only through `|y|` (scalar form,
    /// centered, polynomial in `|y|^2` with coordinate forms).
    pub fn is_radial(&self) -> bool {
        self.terms.iter().all(|t| {
            let scalar = (&t.q - Mat::identity(self.dim, self.dim) * t.q[(0, 0)]).amax() < 1e-14;
            scalar && t.center.amax() == 0.0 && t.poly.iter().all(|(_, i)| i.is_empty())
        })
    }
}

/// `|y|^2` as forms and monomials on `R^n`: coordinate forms `e_i`, monomials `[i, i]`.
pub fn norm_squared_poly(n: usize) -> (Mat, Vector, Vec<(f64, Vec<usize>)>) {
    (Mat::identity(n, n), Vector::zeros(n), (0..n).map(|i| (1.0, vec![i, i])).collect())
}
