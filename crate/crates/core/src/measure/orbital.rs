//! The invariant measure `mu_{O_k}` on the stratum closure, parametrized as
//! `w = k' E(a) g` with `k'` in `K'`, `a` in `GL_k(D)` and `g` in `G`:
//!
//! `mu(phi) = int_G int_{GL_k} int_{K'} phi(k' E(a) g) |det_R a|^{p} dk' da dg`
//!
//! where `E(a)` places `a` in the top-left block, `da` is Haar measure on
//! `GL_k(D)` (Lebesgue over `|det_R a|^k`) and
//! `p = d' - 2k + 2 dim H_k / (k dim D)`. Haar measures on `G` and `K'` have
//! total mass 1.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{herm_skew_dims, Algebra, DMatrix, DScalar};
use crate::dual_pair::DualPairSpec;
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::measure::haar::{group_of, haar_sample, CompactGroup, KPrimeSampler};
use crate::measure::mc::{self, MCEstimate};
use crate::measure::testfn::TestFunction;
use crate::quad::{integrate, integrate_half_line, QuadOptions};

/// Exponent of `|det_R a|` after combining `Ad(a)` on the nilradical with Haar measure.
pub fn det_exponent(p: &DualPairSpec, k: usize) -> f64 {
    let dd = p.alg().dim() as f64;
    let (h, _) = herm_skew_dims(p.alg(), k);
    let kf = k as f64;
    p.d_prime() as f64 - 2.0 * kf + 2.0 * h as f64 / (kf * dd) - kf
}

fn check(p: &DualPairSpec, k: usize, phi: &TestFunction) -> Result<()> {
    if p.alg() == Algebra::H {
        return Err(Error::Unsupported("orbital integrals are sampled only for real and complex pairs".into()));
    }
    if k == 0 || k > p.m() {
        return Err(Error::OutOfRange(format!("k = {k} must lie in 1..={}", p.m())));
    }
    if phi.dim != p.dim_w() {
        return Err(Error::Shape(format!("test function on R^{} but dim W = {}", phi.dim, p.dim_w())));
    }
    Ok(())
}

/// Importance sampler for `mu_{O_k}`; `a` is drawn from an isotropic Gaussian
/// whose width follows the scale of the test function.
#[derive(Clone, Debug)]
pub struct OrbitalSampler {
    spec: DualPairSpec,
    k: usize,
    kprime: KPrimeSampler,
    group: CompactGroup,
    exponent: f64,
}

impl OrbitalSampler {
    pub fn new(p: &DualPairSpec, k: usize) -> Result<Self> {
        check(p, k, &TestFunction::standard(p.dim_w()))?;
        Ok(OrbitalSampler { spec: p.clone(), k, kprime: KPrimeSampler::new(p), group: group_of(p), exponent: det_exponent(p, k) })
    }

    /// Proposal standard deviation for each real coordinate of `a`.
    pub fn sigma(&self, phi: &TestFunction) -> f64 {
        let dd = self.spec.alg().dim() as f64;
        let lam = phi.min_precision();
        let c = phi.max_center_norm();
        (1.5 / (2.0 * std::f64::consts::PI * lam * dd) + c * c / (dd * dd * self.k as f64)).sqrt()
    }

    pub fn weight<R: Rng + ?Sized>(&self, phi: &TestFunction, sigma: f64, rng: &mut R) -> f64 {
        let p = &self.spec;
        let alg = p.alg();
        let kp = self.kprime.sample(rng).expect("real or complex pair");
        let g = haar_sample(self.group, rng);
        let n = alg.dim() * self.k * self.k;
        let x: Vec<f64> = (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
        let log_q = -x.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma * sigma)
            - 0.5 * n as f64 * (2.0 * std::f64::consts::PI * sigma * sigma).ln();
        let a = DMatrix::from_real_vec(alg, self.k, self.k, &x).expect("coordinates");
        let mut e = p.zero_w();
        e.set_block(0, 0, &a);
        let w = &(&kp * &e) * &g.conj_transpose();
        let det = a.det_real().expect("square").abs();
        det.powf(self.exponent) * phi.eval_slice(&p.coords(&w)) * (-log_q).exp()
    }
}

/// Monte-Carlo estimate of `mu_{O_k}(phi)`.
pub fn orbital_integral_mu(p: &DualPairSpec, k: usize, phi: &TestFunction, n_samples: usize, seed: u64) -> Result<MCEstimate> {
    check(p, k, phi)?;
    let s = OrbitalSampler::new(p, k)?;
    let sigma = s.sigma(phi);
    Ok(mc::run(n_samples, seed, |rng| s.weight(phi, sigma, rng)))
}

/// Whether the deterministic path applies: `(O_1, Sp_2)` and `(U_1, U_{1,1})` with `k = 1`.
pub fn has_quadrature(p: &DualPairSpec, k: usize) -> bool {
    k == 1 && p.d() == 1 && p.d_prime() == 2 && matches!(p.alg(), Algebra::R | Algebra::C) && p.witt() == 1
}

/// Deterministic evaluation of `mu_{O_1}(phi)` for the two low-dimensional cases.
///
/// Real case: `(1/2pi) int_0^{2pi} int_R |a| phi(a k'_theta e_1) da dtheta`.
/// Complex case: the common phase of `K' = U_1 x U_1` is absorbed into `a`,
/// leaving `(1/2pi) int_0^{2pi} int_C phi(k'_delta (a, 0)) d^2a d delta` whose inner
/// integral is a Gaussian restriction.
pub fn orbital_integral_quadrature(p: &DualPairSpec, k: usize, phi: &TestFunction) -> Result<MCEstimate> {
    check(p, k, phi)?;
    if !has_quadrature(p, k) {
        return Err(Error::Unsupported(format!("no quadrature path for {} with k = {k}", p.name())));
    }
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 4000 };
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = match p.alg() {
        Algebra::R => {
            // K' = SO_2 realified along F: rotations of the plane.
            let outer = |th: f64| -> f64 {
                let v = [th.cos(), th.sin()];
                let inner = integrate_half_line(
                    |a: f64| a * (phi.eval_slice(&[a * v[0], a * v[1]]) + phi.eval_slice(&[-a * v[0], -a * v[1]])),
                    0.0,
                    opts,
                );
                inner.map(|r| r.value).unwrap_or(f64::NAN)
            };
            integrate(outer, 0.0, two_pi, opts)?
        }
        _ => {
            let KPrimeSampler::Complex { v, .. } = KPrimeSampler::new(p) else { unreachable!() };
            let outer = |delta: f64| -> f64 {
                let phase = num_complex::Complex64::new(0.0, delta).exp();
                let diag = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![phase, 1.0.into()]));
                let kp = &v * diag * v.adjoint();
                let col = |z: num_complex::Complex64| {
                    let w = DMatrix::from_fn(Algebra::C, 2, 1, |r, _| {
                        let x = kp[(r, 0)] * z;
                        DScalar::complex(x.re, x.im)
                    });
                    Vector::from_vec(p.coords(&w))
                };
                let e = Mat::from_columns(&[col(1.0.into()), col(num_complex::Complex64::i())]);
                phi.restrict(&e).map(|r| r.integral()).unwrap_or(f64::NAN)
            };
            integrate(outer, 0.0, two_pi, opts)?
        }
    };
    if !r.value.is_finite() {
        return Err(Error::Quadrature("inner integral failed".into()));
    }
    Ok(MCEstimate::exact(r.value / two_pi, r.error / two_pi, "quadrature"))
}

/// Quadrature when available, Monte Carlo otherwise.
pub fn orbital_integral(p: &DualPairSpec, k: usize, phi: &TestFunction, n_samples: usize, seed: u64) -> Result<MCEstimate> {
    if has_quadrature(p, k) {
        orbital_integral_quadrature(p, k, phi)
    } else {
        orbital_integral_mu(p, k, phi, n_samples, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_pair::catalog_pair;
    use crate::measure::testfn::norm_squared_poly;

    fn shifted(n: usize, c: &[f64]) -> TestFunction {
        TestFunction::gaussian(Mat::identity(n, n), Vector::from_column_slice(c)).unwrap()
    }

    #[test]
    fn exponents() {
        // O_1 x Sp_2: |a|^{2-1}; U_1 x U_{1,1}: |a|^{2(1-1)}; O_3 x Sp_4, k=2: |det a|^{3-2}
        assert_eq!(det_exponent(&catalog_pair("O1_Sp2").unwrap(), 1), 1.0);
        assert_eq!(det_exponent(&catalog_pair("U1_U11").unwrap(), 1), 0.0);
        assert_eq!(det_exponent(&catalog_pair("O3_Sp4").unwrap(), 2), 1.0);
    }

    #[test]
    fn o1_sp2_is_lebesgue_over_pi() {
        let p = catalog_pair("O1_Sp2").unwrap();
        let (f, o, m) = norm_squared_poly(2);
        let phis = [
            TestFunction::standard(2),
            shifted(2, &[0.4, -1.1]),
            TestFunction::standard(2).with_polynomial(&f, &o, &m).unwrap(),
        ];
        for phi in &phis {
            let q = orbital_integral_quadrature(&p, 1, phi).unwrap();
            assert!((q.value - phi.integral() / std::f64::consts::PI).abs() < 1e-10);
            let m = orbital_integral_mu(&p, 1, phi, 200_000, 4).unwrap();
            assert!(m.agrees(&q, 4.0), "{m:?} vs {q:?}");
        }
    }

    #[test]
    fn u1_u11_quadrature_matches_mc() {
        let p = catalog_pair("U1_U11").unwrap();
        let phi = TestFunction::standard(4);
        let q = orbital_integral_quadrature(&p, 1, &phi).unwrap();
        // The cone {Im(conj(w1) w2) = 0}: int_C exp(-2 pi |z|^2) d^2 z = 1/2.
        assert!((q.value - 0.5).abs() < 1e-10, "{q:?}");
        let m = orbital_integral_mu(&p, 1, &phi, 200_000, 9).unwrap();
        assert!(m.agrees(&q, 4.0), "{m:?} vs {q:?}");
        let off = shifted(4, &[0.5, 0.2, -0.3, 0.4]);
        let q = orbital_integral_quadrature(&p, 1, &off).unwrap();
        let m = orbital_integral_mu(&p, 1, &off, 200_000, 10).unwrap();
        assert!(m.agrees(&q, 4.0), "{m:?} vs {q:?}");
    }

    #[test]
    fn decays_away_from_the_cone() {
        let p = catalog_pair("U1_U11").unwrap();
        // w = s (1, i): tau(w) = 2 i s^2 Im(...) is far from zero.
        let mut last = f64::INFINITY;
        for s in [0.0, 0.5, 1.0, 1.5] {
            let w = DMatrix::from_fn(Algebra::C, 2, 1, |r, _| if r == 0 { DScalar::real(s) } else { DScalar::complex(0.0, s) });
            let phi = shifted(4, &p.coords(&w));
            let v = orbital_integral_quadrature(&p, 1, &phi).unwrap().value;
            assert!(v > 0.0 && v < last);
            last = v;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn reproducible_and_errors() {
        let p = catalog_pair("O3_Sp4").unwrap();
        let phi = TestFunction::standard(12);
        let a = orbital_integral_mu(&p, 2, &phi, 20_000, 1).unwrap();
        let b = orbital_integral_mu(&p, 2, &phi, 20_000, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.value > 0.0);
        assert!(orbital_integral_mu(&p, 3, &phi, 10, 1).is_err());
        assert!(orbital_integral_mu(&catalog_pair("Sp1_Ostar4").unwrap(), 1, &TestFunction::standard(8), 10, 1).is_err());
        assert!(orbital_integral_quadrature(&p, 2, &phi).is_err());
    }
}
