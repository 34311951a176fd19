//! Gaussian characters `chi_x`, the Cayley transform and a Fock-weight model
//! of the Weil character on the compact member `G`.
//!
//! `G` acts on `W` by `w -> w g^{-1}`; this commutes with the positive complex
//! structure `J w = F^{-1} w`, so every `g` is a unitary operator on `(W, J)`
//! with eigenvalues `e^{i alpha_j}`. The model is
//! `Theta = prod_j e^{i alpha_j / 2} / (1 - e^{i alpha_j})` with continuous
//! lifts `alpha_j`; the Cayley sheet is fixed by `alpha_j = pi` at `c(0) = -1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, DMatrix, DScalar};
use crate::dual_pair::{b_inner, DualPairSpec, LieAlgebraBasis};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat, Vector};
use crate::measure::TestFunction;

/// Largest allowed angle jump between consecutive points of a tracked path.
pub const MAX_ANGLE_STEP: f64 = PI / 4.0;

#[derive(Clone, Debug)]
pub struct CayleyChart {
    pub spec: DualPairSpec,
    /// `2 dim g / dim V`.
    pub r: f64,
    g_basis: LieAlgebraBasis,
    j: Mat,
    cbasis: Vec<Vector>,
}

impl CayleyChart {
    pub fn new(spec: &DualPairSpec) -> Self {
        let j = spec.w_operator(|w| spec.complex_structure(w));
        let cbasis = linalg::complex_structure_basis(&j);
        CayleyChart {
            spec: spec.clone(),
            r: 2.0 * spec.dim_g() as f64 / spec.dim_v() as f64,
            g_basis: spec.g_basis(),
            j,
            cbasis,
        }
    }

    pub fn g_basis(&self) -> &LieAlgebraBasis {
        &self.g_basis
    }

    /// Complex dimension of `(W, J)`.
    pub fn n_lines(&self) -> usize {
        self.cbasis.len()
    }

    fn check_x(&self, x: &DMatrix) -> Result<()> {
        if x.algebra() != self.spec.alg() || !self.spec.is_in_g(x) {
            return Err(Error::Membership("x is not in g".into()));
        }
        Ok(())
    }

    /// `c(x) = (x + 1)(x - 1)^{-1}`.
    pub fn cayley(&self, x: &DMatrix) -> Result<DMatrix> {
        self.check_x(x)?;
        let one = DMatrix::identity(self.spec.alg(), self.spec.d());
        Ok(&(x + &one) * &(x - &one).inverse()?)
    }

    /// Symmetric `S_x` with `y^T S_x y = tr_R(x tau(w)) / 4` in B-orthonormal coordinates.
    pub fn quad_form(&self, x: &DMatrix) -> Result<Mat> {
        self.check_x(x)?;
        let n = self.spec.dim_w();
        let q = |y: &[f64]| -> f64 {
            let w = self.spec.from_coords(y);
            0.25 * (x * &self.spec.moment_tau(&w).expect("shape")).trace_real().expect("square")
        };
        let e = |i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let diag: Vec<f64> = (0..n).map(|i| q(&e(i))).collect();
        let mut s = Mat::zeros(n, n);
        for i in 0..n {
            s[(i, i)] = diag[i];
            for k in 0..i {
                let mut v = e(i);
                v[k] = 1.0;
                let b = 0.5 * (q(&v) - diag[i] - diag[k]);
                s[(i, k)] = b;
                s[(k, i)] = b;
            }
        }
        Ok(s)
    }

    /// `chi_x(w) = exp(2 pi i tr_R(x tau(w)) / 4)`.
    pub fn chi_x(&self, x: &DMatrix, w: &DMatrix) -> Result<Complex64> {
        self.check_x(x)?;
        let t = 0.25 * (x * &self.spec.moment_tau(w)?).trace_real()?;
        Ok(Complex64::from_polar(1.0, 2.0 * PI * t))
    }

    /// `int_W chi_x(w) phi(w) dw` in closed form.
    pub fn gaussian_pairing(&self, x: &DMatrix, phi: &TestFunction) -> Result<Complex64> {
        if phi.dim != self.spec.dim_w() {
            return Err(Error::Shape(format!("test function on R^{} but dim W = {}", phi.dim, self.spec.dim_w())));
        }
        Ok(phi.pairing(&self.quad_form(x)?))
    }

    /// Complex matrix on `(W, J)` of a real operator commuting with `J`.
    fn complexified(&self, f: impl Fn(&DMatrix) -> DMatrix) -> CMat {
        let a = self.spec.w_operator(f);
        linalg::complexify(&a, &self.j, &self.cbasis)
    }

    /// Complex matrix on `(W, J)` of `w -> w x`.
    pub fn x_operator(&self, x: &DMatrix) -> Result<CMat> {
        self.check_x(x)?;
        Ok(self.complexified(|w| w * x))
    }

    /// Eigenvalues `kappa_j` of `-i C`, `C` the complex matrix of `w -> w x`.
    pub fn kappas(&self, x: &DMatrix) -> Result<Vec<f64>> {
        Ok(kappas_of(&self.x_operator(x)?))
    }

    /// Angles `mu_j = pi - 2 arctan kappa_j` of `c(x)`, in `(0, 2 pi)`.
    pub fn cayley_angles(&self, x: &DMatrix) -> Result<Vec<f64>> {
        Ok(self.kappas(x)?.into_iter().map(|k| PI - 2.0 * k.atan()).collect())
    }

    pub fn theta_on_cayley(&self, x: &DMatrix) -> Result<Complex64> {
        Ok(fock_product(&self.cayley_angles(x)?))
    }

    /// `2^{-dim W / 2} |det_R(1 - x)|_V^{d'/2}`.
    pub fn theta_magnitude_closed(&self, x: &DMatrix) -> Result<f64> {
        self.check_x(x)?;
        let one = DMatrix::identity(self.spec.alg(), self.spec.d());
        let det = (&one - x).det_real()?.abs();
        Ok(2f64.powf(-(self.spec.dim_w() as f64) / 2.0) * det.powf(self.spec.d_prime() as f64 / 2.0))
    }

    /// `1 / |det_J(1 - c(x))|` on `W`, by a complex determinant.
    pub fn theta_magnitude_det(&self, x: &DMatrix) -> Result<f64> {
        let cinv = self.cayley(x)?.inverse()?;
        let m = self.complexified(|w| w - &(w * &cinv));
        Ok(1.0 / m.determinant().norm())
    }

    /// `2^{dim g} |det_R(1 - x)|^{-r}`.
    pub fn cayley_jacobian(&self, x: &DMatrix) -> Result<f64> {
        self.check_x(x)?;
        let one = DMatrix::identity(self.spec.alg(), self.spec.d());
        let det = (&one - x).det_real()?.abs();
        Ok(2f64.powi(self.spec.dim_g() as i32) * det.powf(-self.r))
    }

    /// Jacobian of `x -> c(x)` against B-orthonormal coordinates on `g` and the
    /// left-invariant measure on `G`, by central differences.
    pub fn cayley_jacobian_fd(&self, x: &DMatrix, h: f64) -> Result<f64> {
        let cinv = self.cayley(x)?.inverse()?;
        let basis = &self.g_basis.vectors;
        let n = basis.len();
        if n == 0 {
            return Ok(1.0);
        }
        let mut jac = Mat::zeros(n, n);
        for (i, e) in basis.iter().enumerate() {
            let plus = self.cayley(&(x + &e.scale(h)))?;
            let minus = self.cayley(&(x - &e.scale(h)))?;
            let dv = (&cinv * &(&plus - &minus)).scale(0.5 / h);
            for (k, f) in basis.iter().enumerate() {
                jac[(k, i)] = b_inner(&dv, f);
            }
        }
        Ok(jac.determinant().abs())
    }

    /// Eigen-angles in `(-pi, pi]` of `w -> w g^{-1}` on `(W, J)`.
    pub fn w_angles(&self, g: &DMatrix) -> Result<Vec<f64>> {
        let ginv = g.inverse()?;
        let u = self.complexified(|w| w * &ginv);
        let ev = u
            .eigenvalues()
            .ok_or_else(|| Error::Singular("eigenvalues of the W operator did not converge".into()))?;
        Ok(ev.iter().map(|z| z.arg()).collect())
    }

    /// `Theta(c(0)) Theta(c(x)) int chi_x` against `Theta` at the angles `mu_j + pi`.
    pub fn cocycle(&self, x: &DMatrix) -> Result<(Complex64, Complex64)> {
        let mu = self.cayley_angles(x)?;
        let s = self.quad_form(x)?;
        let eig = crate::linalg::sym_eigen(s);
        let scale = eig.eigenvalues.amax().max(1e-300);
        let mut fresnel = Complex64::new(1.0, 0.0);
        for &l in eig.eigenvalues.iter() {
            if l.abs() < 1e-10 * scale {
                return Err(Error::Singular("degenerate x: the Fresnel integral diverges".into()));
            }
            fresnel *= Complex64::from_polar(1.0 / (2.0 * l.abs()).sqrt(), PI * l.signum() / 4.0);
        }
        let origin = fock_product(&vec![PI; mu.len()]);
        let lhs = origin * fock_product(&mu) * fresnel;
        let shifted: Vec<f64> = mu.iter().map(|m| m + PI).collect();
        Ok((lhs, fock_product(&shifted)))
    }

    pub fn random_x<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix {
        self.spec.random_g_element(rng)
    }
}

/// Eigenvalues of `-i C` for a skew-hermitian `C`.
pub fn kappas_of(c: &CMat) -> Vec<f64> {
    let h = c.map(|z| Complex64::new(z.im, -z.re));
    linalg::hermitian_eigenvalues(&((&h + h.adjoint()) * Complex64::new(0.5, 0.0)))
}

/// `prod_j e^{i a_j / 2} / (1 - e^{i a_j})`.
pub fn fock_product(angles: &[f64]) -> Complex64 {
    angles
        .iter()
        .map(|&a| Complex64::from_polar(1.0, a / 2.0) / (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, a)))
        .product()
}

/// Whether `d = m` or the form `(.,.)'` is split.
pub fn hypothesis_holds(p: &DualPairSpec) -> bool {
    p.d() == p.m() || p.is_split()
}

/// Maximal torus element with the given angles: diagonal phases for `U_d` and
/// `Sp_d`, rotation blocks for `O_d`.
pub fn torus_element(p: &DualPairSpec, angles: &[f64]) -> Result<DMatrix> {
    let d = p.d();
    let rank = if p.alg() == Algebra::R { d / 2 } else { d };
    if angles.len() != rank {
        return Err(Error::Shape(format!("torus of {} has rank {rank}, got {} angles", p.group_name(), angles.len())));
    }
    let mut g = DMatrix::identity(p.alg(), d);
    for (i, &a) in angles.iter().enumerate() {
        match p.alg() {
            Algebra::R => {
                let (s, c) = a.sin_cos();
                g.set(2 * i, 2 * i, DScalar::real(c));
                g.set(2 * i, 2 * i + 1, DScalar::real(-s));
                g.set(2 * i + 1, 2 * i, DScalar::real(s));
                g.set(2 * i + 1, 2 * i + 1, DScalar::real(c));
            }
            _ => g.set(i, i, DScalar::complex(a.cos(), a.sin())),
        }
    }
    Ok(g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftStart {
    /// `c(0) = -1` with every angle `pi`.
    CayleyOrigin,
    /// The identity with every angle `0` (a pole of `Theta`).
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedPath {
    pub angles: Vec<Vec<f64>>,
    pub theta: Vec<Option<Complex64>>,
    pub chi_plus: Vec<Option<Complex64>>,
    pub max_step: f64,
}

fn wrap(a: f64) -> f64 {
    let t = (a + PI).rem_euclid(2.0 * PI) - PI;
    if t == -PI {
        PI
    } else {
        t
    }
}

/// `chi_+ = Theta / |Theta| = prod_j i sgn(sin(a_j / 2))`; `None` at a pole.
pub fn chi_plus_of(angles: &[f64]) -> Option<Complex64> {
    let mut z = Complex64::new(1.0, 0.0);
    for &a in angles {
        let s = (a / 2.0).sin();
        if s.abs() < 1e-12 {
            return None;
        }
        z *= Complex64::new(0.0, s.signum());
    }
    Some(z)
}

/// Follows continuous lifts of the eigen-angles along a path in `G` by
/// nearest-angle matching.
pub fn track_path(chart: &CayleyChart, path: &[DMatrix], start: LiftStart) -> Result<TrackedPath> {
    if !hypothesis_holds(&chart.spec) {
        return Err(Error::Unsupported(format!("{}: d > m and the form is not split", chart.spec.name())));
    }
    let first = path.first().ok_or_else(|| Error::OutOfRange("empty path".into()))?;
    let (target, a0) = match start {
        LiftStart::CayleyOrigin => (-1.0, PI),
        LiftStart::Identity => (1.0, 0.0),
    };
    let id = DMatrix::identity(chart.spec.alg(), chart.spec.d());
    if (first - &id.scale(target)).max_abs() > 1e-9 {
        return Err(Error::OutOfRange("path does not start at the chosen lift".into()));
    }
    let mut lifts = vec![a0; chart.n_lines()];
    let mut out = TrackedPath { angles: Vec::new(), theta: Vec::new(), chi_plus: Vec::new(), max_step: 0.0 };
    for g in path {
        let cur = chart.w_angles(g)?;
        let mut used = vec![false; cur.len()];
        for l in lifts.iter_mut() {
            let (best, step) = cur
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, c)| (i, wrap(c - *l)))
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .expect("as many angles as lines");
            used[best] = true;
            out.max_step = out.max_step.max(step.abs());
            *l += step;
        }
        if out.max_step > MAX_ANGLE_STEP {
            return Err(Error::OutOfRange(format!("path too coarse: angle step {:.3}", out.max_step)));
        }
        let chi = chi_plus_of(&lifts);
        out.theta.push(chi.map(|_| fock_product(&lifts)));
        out.chi_plus.push(chi);
        out.angles.push(lifts.clone());
    }
    Ok(out)
}

/// `chi_+` at the end of the path.
pub fn chi_plus(chart: &CayleyChart, path: &[DMatrix], start: LiftStart) -> Result<Complex64> {
    let t = track_path(chart, path, start)?;
    t.chi_plus
        .last()
        .copied()
        .flatten()
        .ok_or_else(|| Error::Singular("Theta has a pole at the end of the path".into()))
}

/// Slope of `log |int chi_{s x0} phi|` against `log s`.
pub fn pairing_decay_slope(chart: &CayleyChart, x0: &DMatrix, phi: &TestFunction, ss: &[f64]) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &s in ss {
        xs.push(s.ln());
        ys.push(chart.gaussian_pairing(&x0.scale(s), phi)?.norm().ln());
    }
    Ok(linalg::line_fit(&xs, &ys).0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeilConsistency {
    pub pair: String,
    pub samples: usize,
    /// Worst `| |Theta| 2^{dim W/2} |det(1-x)|^{-d'/2} - 1 |`.
    pub magnitude_error: f64,
    /// Worst relative gap between the Fock product and the determinant path.
    pub det_path_error: f64,
    /// Worst relative Cayley Jacobian error (closed form against differences).
    pub jacobian_error: f64,
    /// Worst `|lhs - rhs| / |rhs|` of the cocycle identity, when `x` is regular.
    pub cocycle_error: Option<f64>,
    pub theta_at_origin: Complex64,
}

pub fn weil_consistency<R: Rng + ?Sized>(p: &DualPairSpec, samples: usize, rng: &mut R) -> Result<WeilConsistency> {
    let chart = CayleyChart::new(p);
    let mut out = WeilConsistency {
        pair: p.name().to_string(),
        samples,
        magnitude_error: 0.0,
        det_path_error: 0.0,
        jacobian_error: 0.0,
        cocycle_error: None,
        theta_at_origin: chart.theta_on_cayley(&DMatrix::zeros(p.alg(), p.d(), p.d()))?,
    };
    for i in 0..samples {
        let x = chart.random_x(rng);
        let theta = chart.theta_on_cayley(&x)?;
        let closed = chart.theta_magnitude_closed(&x)?;
        out.magnitude_error = out.magnitude_error.max((theta.norm() / closed - 1.0).abs());
        out.det_path_error = out.det_path_error.max((chart.theta_magnitude_det(&x)? / theta.norm() - 1.0).abs());
        if i < 10 {
            let j = chart.cayley_jacobian(&x)?;
            out.jacobian_error = out.jacobian_error.max((chart.cayley_jacobian_fd(&x, 1e-4)? / j - 1.0).abs());
        }
        match chart.cocycle(&x) {
            Ok((l, r)) => {
                let e = (l - r).norm() / r.norm();
                out.cocycle_error = Some(out.cocycle_error.map_or(e, |c| c.max(e)));
            }
            Err(Error::Singular(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_pair::catalog_pair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complex_structure_is_orthogonal() {
        for (name, _) in crate::dual_pair::catalog() {
            let c = CayleyChart::new(&catalog_pair(name).unwrap());
            let n = c.j.nrows();
            assert!((&c.j * &c.j + Mat::identity(n, n)).amax() < 1e-12, "{name}");
            assert!((c.j.transpose() * &c.j - Mat::identity(n, n)).amax() < 1e-12, "{name}");
            assert_eq!(2 * c.n_lines(), n);
        }
    }

    #[test]
    fn theta_at_origin() {
        for (name, _) in crate::dual_pair::catalog() {
            let p = catalog_pair(name).unwrap();
            let c = CayleyChart::new(&p);
            let t = c.theta_on_cayley(&DMatrix::zeros(p.alg(), p.d(), p.d())).unwrap();
            let want = Complex64::new(0.0, 0.5).powu((p.dim_w() / 2) as u32);
            assert!((t - want).norm() < 1e-12, "{name}: {t}");
        }
    }

    #[test]
    fn u1_kappas_and_cocycle() {
        let p = catalog_pair("U1_U11").unwrap();
        let c = CayleyChart::new(&p);
        let x = DMatrix::from_fn(Algebra::C, 1, 1, |_, _| DScalar::complex(0.0, 0.7));
        let mut k = c.kappas(&x).unwrap();
        k.sort_by(f64::total_cmp);
        assert!((k[0] + 0.7).abs() < 1e-12 && (k[1] - 0.7).abs() < 1e-12);
        let (l, r) = c.cocycle(&x).unwrap();
        assert!((l - r).norm() < 1e-10 * r.norm(), "{l} {r}");
    }

    #[test]
    fn pushforward_on_u1() {
        // int_R f(c(t e)) J(t) dt = sqrt(2) int_0^{2 pi} f(e^{i a}) da for B-unit e.
        let p = catalog_pair("U1_U11").unwrap();
        let c = CayleyChart::new(&p);
        let e = c.g_basis().vectors[0].clone();
        let f = |z: DScalar| 2.0 + z.0[0] + 0.3 * (z.0[0] * z.0[0] - z.0[1] * z.0[1]) + 0.2 * z.0[1];
        let lhs = crate::quad::integrate_real_line(
            |t: f64| {
                let x = e.scale(t);
                f(c.cayley(&x).unwrap().get(0, 0)) * c.cayley_jacobian(&x).unwrap()
            },
            crate::quad::QuadOptions::default(),
        )
        .unwrap()
        .value;
        let want = 2f64.sqrt() * 2.0 * PI * 2.0;
        assert!((lhs / want - 1.0).abs() < 1e-6, "{lhs} {want}");
    }

    #[test]
    fn tracking_and_chi_plus() {
        let p = catalog_pair("U1_U11").unwrap();
        let c = CayleyChart::new(&p);
        // Along the Cayley image from c(0) = -1 the tracked value matches theta_on_cayley.
        let x = DMatrix::from_fn(Algebra::C, 1, 1, |_, _| DScalar::complex(0.0, 1.3));
        let path: Vec<DMatrix> = (0..=200).map(|i| c.cayley(&x.scale(i as f64 / 200.0)).unwrap()).collect();
        let t = track_path(&c, &path, LiftStart::CayleyOrigin).unwrap();
        let last = t.theta.last().unwrap().unwrap();
        assert!((last - c.theta_on_cayley(&x).unwrap()).norm() < 1e-10);
        // From the identity the torus of U_1 has chi_+ = 1; a full loop returns to +-1.
        let loop_path: Vec<DMatrix> = (0..=400).map(|i| torus_element(&p, &[2.0 * PI * i as f64 / 400.0]).unwrap()).collect();
        let t = track_path(&c, &loop_path, LiftStart::Identity).unwrap();
        for z in t.chi_plus[1..400].iter() {
            assert!((z.unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(t.chi_plus[400].is_none());
        let half = &loop_path[..=200];
        assert!((chi_plus(&c, half, LiftStart::Identity).unwrap().norm() - 1.0).abs() < 1e-12);
        // Cayley sheet: the opposite lift.
        let z = chi_plus(&c, &path, LiftStart::CayleyOrigin).unwrap();
        assert!((z + Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(track_path(&CayleyChart::new(&catalog_pair("U2_U12").unwrap()), &path, LiftStart::CayleyOrigin).is_err());
    }

    #[test]
    fn consistency_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for name in ["O1_Sp2", "O2_Sp4", "O3_Sp4", "U1_U11", "U2_U11", "U2_U22", "Sp1_Ostar4"] {
            let r = weil_consistency(&catalog_pair(name).unwrap(), 20, &mut rng).unwrap();
            assert!(r.magnitude_error < 1e-10 && r.det_path_error < 1e-10, "{r:?}");
            assert!(r.jacobian_error < 1e-6, "{r:?}");
        }
        let r = weil_consistency(&catalog_pair("U1_U11").unwrap(), 20, &mut rng).unwrap();
        assert!(r.cocycle_error.unwrap() < 1e-8);
    }

    #[test]
    fn pairing_properties() {
        let p = catalog_pair("U1_U11").unwrap();
        let c = CayleyChart::new(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = TestFunction::standard(4);
        assert!((c.gaussian_pairing(&DMatrix::zeros(Algebra::C, 1, 1), &phi).unwrap() - 1.0).norm() < 1e-12);
        let x = c.random_x(&mut rng);
        let a = c.gaussian_pairing(&x, &phi).unwrap();
        let b = c.gaussian_pairing(&x.scale(-1.0), &phi).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
        let w = p.random_w(&mut rng);
        assert!((c.chi_x(&x, &w).unwrap().norm() - 1.0).abs() < 1e-14);
        let x0 = DMatrix::from_fn(Algebra::C, 1, 1, |_, _| DScalar::complex(0.0, 1.0));
        let slope = pairing_decay_slope(&c, &x0, &phi, &[200.0, 400.0, 800.0, 1600.0]).unwrap();
        assert!((slope + 2.0).abs() < 1e-3, "{slope}");
    }
}
