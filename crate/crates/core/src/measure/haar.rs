//! Haar-distributed samples from compact classical groups.

use nalgebra as na;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, DMatrix, DScalar};
use crate::dual_pair::DualPairSpec;
use crate::linalg::{self, Mat, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompactGroup {
    O(usize),
    SO(usize),
    U(usize),
    /// The compact symplectic group `U_n(H)`.
    Sp(usize),
    /// `U_p x U_q`, block diagonal.
    UPQ(usize, usize),
}

impl CompactGroup {
    pub fn algebra(self) -> Algebra {
        match self {
            CompactGroup::O(_) | CompactGroup::SO(_) => Algebra::R,
            CompactGroup::U(_) | CompactGroup::UPQ(..) => Algebra::C,
            CompactGroup::Sp(_) => Algebra::H,
        }
    }

    pub fn size(self) -> usize {
        match self {
            CompactGroup::O(n) | CompactGroup::SO(n) | CompactGroup::U(n) | CompactGroup::Sp(n) => n,
            CompactGroup::UPQ(p, q) => p + q,
        }
    }
}

fn gaussian_scalar<R: Rng + ?Sized>(alg: Algebra, rng: &mut R) -> DScalar {
    let c: Vec<f64> = (0..alg.dim()).map(|_| rng.sample(StandardNormal)).collect();
    DScalar::from_coords(alg, &c)
}

/// Gram-Schmidt on a Gaussian matrix; the positive diagonal of the triangular
/// factor makes the orthogonal factor exactly Haar distributed.
fn orthonormalized<R: Rng + ?Sized>(alg: Algebra, n: usize, rng: &mut R) -> DMatrix {
    let mut cols: Vec<Vec<DScalar>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<DScalar> = (0..n).map(|_| gaussian_scalar(alg, rng)).collect();
        for _ in 0..2 {
            for u in &cols {
                // v <- v - u (u^* v)
                let mut ip = DScalar::ZERO;
                for (a, b) in u.iter().zip(&v) {
                    ip += a.conj() * *b;
                }
                for (a, b) in u.iter().zip(v.iter_mut()) {
                    *b = *b - *a * ip;
                }
            }
        }
        let norm = v.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-10 {
            continue;
        }
        cols.push(v.into_iter().map(|s| s.scale(1.0 / norm)).collect());
    }
    DMatrix::from_fn(alg, n, n, |r, c| cols[c][r])
}

pub fn haar_sample<R: Rng + ?Sized>(g: CompactGroup, rng: &mut R) -> DMatrix {
    match g {
        CompactGroup::O(n) | CompactGroup::U(n) | CompactGroup::Sp(n) => orthonormalized(g.algebra(), n, rng),
        CompactGroup::SO(n) => {
            let mut m = orthonormalized(Algebra::R, n, rng);
            if n > 0 && m.det_real().expect("square") < 0.0 {
                for r in 0..n {
                    m.set(r, n - 1, -m.get(r, n - 1));
                }
            }
            m
        }
        CompactGroup::UPQ(p, q) => {
            let mut m = DMatrix::zeros(Algebra::C, p + q, p + q);
            m.set_block(0, 0, &orthonormalized(Algebra::C, p, rng));
            m.set_block(p, p, &orthonormalized(Algebra::C, q, rng));
            m
        }
    }
}

/// The defining group `G` of a pair.
pub fn group_of(p: &DualPairSpec) -> CompactGroup {
    match p.alg() {
        Algebra::R => CompactGroup::O(p.d()),
        Algebra::C => CompactGroup::U(p.d()),
        Algebra::H => CompactGroup::Sp(p.d()),
    }
}

/// Haar sampler for the maximal compact subgroup `K'` of `G'`, the
/// centralizer of `F` in the unitary group of `V'`.
#[derive(Clone, Debug)]
pub enum KPrimeSampler {
    /// `Sp_{2l}(R) cap O_{2l} = U_l`, realified along the complex structure `F`.
    Real { basis: Vec<Vector>, j: Mat },
    /// `U_{p,q} cap U_{p+q} = U_p x U_q` in an eigenbasis of `iF`.
    Complex { v: na::DMatrix<Complex64>, p: usize, q: usize },
    Unsupported,
}

impl KPrimeSampler {
    pub fn new(spec: &DualPairSpec) -> Self {
        match spec.alg() {
            Algebra::R => {
                let j = spec.form().real_embedding();
                KPrimeSampler::Real { basis: linalg::complex_structure_basis(&j), j }
            }
            Algebra::C => {
                let f = spec.form();
                let n = f.rows();
                let h = na::DMatrix::from_fn(n, n, |r, c| {
                    let z = f.get(r, c);
                    Complex64::new(-z.0[1], z.0[0])
                });
                let eig = crate::linalg::sym_eigen(h);
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
                let p = idx.iter().filter(|&&i| eig.eigenvalues[i] > 0.0).count();
                let v = na::DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
                KPrimeSampler::Complex { v, p, q: n - p }
            }
            Algebra::H => KPrimeSampler::Unsupported,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<DMatrix> {
        match self {
            KPrimeSampler::Real { basis, j } => {
                let l = basis.len();
                let u = orthonormalized(Algebra::C, l, rng);
                let n = j.nrows();
                let jb: Vec<Vector> = basis.iter().map(|e| j * e).collect();
                let mut m = Mat::zeros(n, n);
                for k in 0..l {
                    let mut img_e = Vector::zeros(n);
                    let mut img_je = Vector::zeros(n);
                    for r in 0..l {
                        let z = u.get(r, k);
                        img_e += &basis[r] * z.0[0] + &jb[r] * z.0[1];
                        // (i u)_{rk}: the image of J e_k is J applied to the image of e_k.
                        img_je += &jb[r] * z.0[0] - &basis[r] * z.0[1];
                    }
                    // m e_k = img_e, m J e_k = img_je
                    m += &img_e * basis[k].transpose() + &img_je * jb[k].transpose();
                }
                Some(DMatrix::from_real(Algebra::R, &m))
            }
            KPrimeSampler::Complex { v, p, q } => {
                let n = p + q;
                let u = haar_sample(CompactGroup::UPQ(*p, *q), rng);
                let uc = na::DMatrix::from_fn(n, n, |r, c| {
                    let z = u.get(r, c);
                    Complex64::new(z.0[0], z.0[1])
                });
                let k = v * uc * v.adjoint();
                Some(DMatrix::from_fn(Algebra::C, n, n, |r, c| DScalar::complex(k[(r, c)].re, k[(r, c)].im)))
            }
            KPrimeSampler::Unsupported => None,
        }
    }
}
