//! Dual pairs `(G, G')` with `G` compact: the space `W = M_{d',d}(D)`, its
//! symplectic and positive forms, the moment maps and the Lie algebras.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{herm_skew_dims, matrix_basis, skew_hermitian_basis, Algebra, DMatrix, DScalar};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Absolute tolerance on each real coordinate for Lie algebra membership.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// JSON pair descriptor `{"algebra","d","d_prime","witt"}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDescriptor {
    pub algebra: Algebra,
    pub d: usize,
    pub d_prime: usize,
    pub witt: usize,
}

/// Named pairs used throughout the tests and the CLI.
pub fn catalog() -> Vec<(&'static str, PairDescriptor)> {
    let p = |algebra, d, d_prime, witt| PairDescriptor { algebra, d, d_prime, witt };
    vec![
        ("O1_Sp2", p(Algebra::R, 1, 2, 1)),
        ("O2_Sp4", p(Algebra::R, 2, 4, 2)),
        ("O3_Sp4", p(Algebra::R, 3, 4, 2)),
        ("O3_Sp8", p(Algebra::R, 3, 8, 4)),
        ("U1_U11", p(Algebra::C, 1, 2, 1)),
        ("U2_U11", p(Algebra::C, 2, 2, 1)),
        ("U2_U22", p(Algebra::C, 2, 4, 2)),
        ("Sp1_Ostar4", p(Algebra::H, 1, 2, 1)),
        ("O1_Sp4", p(Algebra::R, 1, 4, 2)),
        ("O1_Sp6", p(Algebra::R, 1, 6, 3)),
        ("U2_U12", p(Algebra::C, 2, 3, 1)),
        ("Sp2_Ostar6", p(Algebra::H, 2, 3, 1)),
    ]
}

/// Looks up a catalog pair by name.
pub fn catalog_pair(name: &str) -> Result<DualPairSpec> {
    catalog()
        .into_iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidPair(format!("unknown pair '{name}'")))
        .and_then(|(n, desc)| DualPairSpec::named(n, desc))
}

/// Which Lie algebra a basis spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LieKind {
    G,
    GPrime,
    S1,
}

#[derive(Clone, Debug)]
pub struct LieAlgebraBasis {
    pub which: LieKind,
    pub vectors: Vec<DMatrix>,
}

impl LieAlgebraBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// `sum_a c_a e_a`.
    pub fn combine(&self, coeffs: &[f64]) -> DMatrix {
        let mut out = self.vectors[0].scale(0.0);
        for (c, v) in coeffs.iter().zip(&self.vectors) {
            out = &out + &v.scale(*c);
        }
        out
    }
}

/// An irreducible dual pair with compact `G`, with `F` in block form
/// `[[0,0,I_k],[0,F',0],[-I_k,0,0]]`.
#[derive(Clone, Debug)]
pub struct DualPairSpec {
    name: String,
    desc: PairDescriptor,
    block: usize,
    f: DMatrix,
    f_inv: DMatrix,
}

impl DualPairSpec {
    pub fn new(desc: PairDescriptor) -> Result<Self> {
        Self::named(&format!("{}_{}_{}_{}", desc.algebra, desc.d, desc.d_prime, desc.witt), desc)
    }

    pub fn named(name: &str, desc: PairDescriptor) -> Result<Self> {
        let PairDescriptor { algebra, d, d_prime, witt } = desc;
        if d == 0 || d_prime == 0 {
            return Err(Error::InvalidPair("d and d_prime must be positive".into()));
        }
        match algebra {
            Algebra::R => {
                if d_prime % 2 != 0 || witt != d_prime / 2 {
                    return Err(Error::InvalidPair(
                        "real pairs need even d_prime and witt = d_prime/2 (symplectic form)".into(),
                    ));
                }
            }
            Algebra::C => {
                if witt > d_prime / 2 {
                    return Err(Error::InvalidPair(format!("witt index {witt} exceeds d_prime/2")));
                }
            }
            Algebra::H => {
                if witt != d_prime / 2 {
                    return Err(Error::InvalidPair(
                        "quaternionic skew-hermitian forms have witt index floor(d_prime/2)".into(),
                    ));
                }
            }
        }
        let m = d.min(witt);
        let f = build_form(desc, m);
        let f_inv = f.inverse()?;
        Ok(DualPairSpec { name: name.to_string(), desc, block: m, f, f_inv })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let desc: PairDescriptor =
            serde_json::from_str(s).map_err(|e| Error::InvalidPair(format!("bad descriptor: {e}")))?;
        Self::new(desc)
    }

    /// The same pair with the rows of `V'` reordered so that `F` has block
    /// form with `I_k` corners.
    pub fn adapted(&self, k: usize) -> Result<Self> {
        let m = self.m();
        if k > m {
            return Err(Error::OutOfRange(format!("k = {k} > m = {m}")));
        }
        let dp = self.desc.d_prime;
        let mut order: Vec<usize> = (0..k).collect();
        order.extend(k..m);
        order.extend(m..dp - m);
        order.extend(dp - m + k..dp);
        order.extend(dp - m..dp - m + k);
        let f = DMatrix::from_fn(self.alg(), dp, dp, |r, c| self.f.get(order[r], order[c]));
        let f_inv = f.inverse()?;
        Ok(DualPairSpec { name: self.name.clone(), desc: self.desc, block: k, f, f_inv })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn descriptor(&self) -> PairDescriptor {
        self.desc
    }
    pub fn alg(&self) -> Algebra {
        self.desc.algebra
    }
    pub fn d(&self) -> usize {
        self.desc.d
    }
    pub fn d_prime(&self) -> usize {
        self.desc.d_prime
    }
    pub fn witt(&self) -> usize {
        self.desc.witt
    }
    pub fn m(&self) -> usize {
        self.desc.d.min(self.desc.witt)
    }
    /// Size of the `I` corners of `F`.
    pub fn block(&self) -> usize {
        self.block
    }
    pub fn form(&self) -> &DMatrix {
        &self.f
    }
    pub fn form_inv(&self) -> &DMatrix {
        &self.f_inv
    }

    /// Middle block `F'` of the form.
    pub fn form_middle(&self) -> DMatrix {
        let k = self.block;
        self.f.block(k, k, self.d_prime() - 2 * k, self.d_prime() - 2 * k)
    }

    pub fn dim_w(&self) -> usize {
        self.d() * self.d_prime() * self.alg().dim()
    }

    pub fn dim_v(&self) -> usize {
        self.d() * self.alg().dim()
    }

    pub fn dim_g(&self) -> usize {
        let (_, sh) = herm_skew_dims(self.alg(), self.d());
        sh
    }

    /// Classical dimension of `g'`: `sp_{2l}(R)`, `u_{p,q}`, `o*(2n)`.
    pub fn dim_g_prime(&self) -> usize {
        let n = self.d_prime();
        match self.alg() {
            Algebra::R => (n / 2) * (n + 1),
            Algebra::C => n * n,
            Algebra::H => n * (2 * n - 1),
        }
    }

    /// Signature `(p, q)` of the hermitian form `iF` (complex pairs only).
    pub fn signature(&self) -> Option<(usize, usize)> {
        (self.alg() == Algebra::C).then(|| (self.witt(), self.d_prime() - self.witt()))
    }

    /// Whether `(.,.)'` is split, i.e. `W` has a `G`-stable complete polarization.
    pub fn is_split(&self) -> bool {
        match self.alg() {
            Algebra::R => true,
            Algebra::C => 2 * self.witt() == self.d_prime(),
            Algebra::H => self.d_prime() % 2 == 0,
        }
    }

    /// Name of the compact member.
    pub fn group_name(&self) -> String {
        let p = match self.alg() {
            Algebra::R => "O",
            Algebra::C => "U",
            Algebra::H => "Sp",
        };
        format!("{p}{}", self.d())
    }

    fn check_w(&self, w: &DMatrix) -> Result<()> {
        if w.shape() != (self.d_prime(), self.d()) || w.algebra() != self.alg() {
            return Err(Error::Shape(format!(
                "expected {}x{} over {}, got {}x{} over {}",
                self.d_prime(),
                self.d(),
                self.alg(),
                w.rows(),
                w.cols(),
                w.algebra()
            )));
        }
        Ok(())
    }

    pub fn zero_w(&self) -> DMatrix {
        DMatrix::zeros(self.alg(), self.d_prime(), self.d())
    }

    /// `w* = conj(w)^T F`.
    pub fn star(&self, w: &DMatrix) -> Result<DMatrix> {
        self.check_w(w)?;
        Ok(&w.conj_transpose() * &self.f)
    }

    /// `<w', w> = tr_R(w* w')`.
    pub fn symplectic_form(&self, wp: &DMatrix, w: &DMatrix) -> Result<f64> {
        self.check_w(wp)?;
        (&self.star(w)? * wp).trace_real()
    }

    /// `B(w', w) = tr_R(conj(w)^T w')`.
    pub fn b_form(&self, wp: &DMatrix, w: &DMatrix) -> Result<f64> {
        self.check_w(wp)?;
        self.check_w(w)?;
        Ok(b_inner(wp, w))
    }

    /// `theta(w) = -F^{-1} w`.
    pub fn theta(&self, w: &DMatrix) -> Result<DMatrix> {
        self.check_w(w)?;
        Ok(-&(&self.f_inv * w))
    }

    /// The positive compatible complex structure `J w = F^{-1} w`.
    pub fn complex_structure(&self, w: &DMatrix) -> DMatrix {
        &self.f_inv * w
    }

    /// `tau(w) = w* w`, valued in `g`.
    pub fn moment_tau(&self, w: &DMatrix) -> Result<DMatrix> {
        Ok(&self.star(w)? * w)
    }

    /// `tau'(w) = w w*`, valued in `g'`.
    pub fn moment_tau_prime(&self, w: &DMatrix) -> Result<DMatrix> {
        Ok(w * &self.star(w)?)
    }

    pub fn is_in_g(&self, x: &DMatrix) -> bool {
        x.shape() == (self.d(), self.d()) && x.is_skew_hermitian(MEMBERSHIP_TOL)
    }

    pub fn is_in_g_prime(&self, x: &DMatrix) -> bool {
        x.shape() == (self.d_prime(), self.d_prime())
            && (&(&x.conj_transpose() * &self.f) + &(&self.f * x)).max_abs() <= MEMBERSHIP_TOL
    }

    /// Tangent vector `x' w - w x` of the orbit through `w`.
    pub fn inf_action(&self, x: &DMatrix, xp: &DMatrix, w: &DMatrix) -> Result<DMatrix> {
        self.check_w(w)?;
        if !self.is_in_g(x) {
            return Err(Error::Membership("x is not in g".into()));
        }
        if !self.is_in_g_prime(xp) {
            return Err(Error::Membership("x' is not in g'".into()));
        }
        Ok(&(xp * w) - &(w * x))
    }

    /// Action of `(g, g')` on `W`: `w -> g' w g^{-1}`.
    pub fn act(&self, g: &DMatrix, gp: &DMatrix, w: &DMatrix) -> Result<DMatrix> {
        self.check_w(w)?;
        Ok(&(gp * w) * &g.inverse()?)
    }

    /// B-orthonormal basis of `g` (skew-hermitian matrices).
    pub fn g_basis(&self) -> LieAlgebraBasis {
        LieAlgebraBasis { which: LieKind::G, vectors: skew_hermitian_basis(self.alg(), self.d()) }
    }

    /// B-orthonormal basis of `g'`, computed as the kernel of `x -> x^* F + F x`.
    pub fn g_prime_basis(&self) -> LieAlgebraBasis {
        let alg = self.alg();
        let n = self.d_prime();
        let nd = n * n * alg.dim();
        let map = linalg::matrix_of(nd, |v| {
            let x = DMatrix::from_real_vec(alg, n, n, v).expect("coordinates");
            (&(&x.conj_transpose() * &self.f) + &(&self.f * &x)).to_real_vec()
        });
        let ker = linalg::null_space(&map, 1e-9);
        let s = 1.0 / (alg.dim() as f64).sqrt();
        let vectors = ker
            .column_iter()
            .map(|c| {
                let v: Vec<f64> = c.iter().map(|x| x * s).collect();
                DMatrix::from_real_vec(alg, n, n, &v).expect("coordinates")
            })
            .collect();
        LieAlgebraBasis { which: LieKind::GPrime, vectors }
    }

    /// B-orthonormal basis of `W`.
    pub fn w_basis(&self) -> LieAlgebraBasis {
        LieAlgebraBasis { which: LieKind::S1, vectors: matrix_basis(self.alg(), self.d_prime(), self.d()) }
    }

    /// B-orthonormal real coordinates `y = sqrt(dim D) * (real coordinates)`.
    pub fn coords(&self, w: &DMatrix) -> Vec<f64> {
        let s = (self.alg().dim() as f64).sqrt();
        w.to_real_vec().into_iter().map(|x| x * s).collect()
    }

    pub fn from_coords(&self, y: &[f64]) -> DMatrix {
        let s = 1.0 / (self.alg().dim() as f64).sqrt();
        let v: Vec<f64> = y.iter().map(|x| x * s).collect();
        DMatrix::from_real_vec(self.alg(), self.d_prime(), self.d(), &v).expect("coordinate length")
    }

    /// Real matrix, in B-orthonormal coordinates, of a real-linear map on `W`.
    pub fn w_operator(&self, f: impl Fn(&DMatrix) -> DMatrix) -> Mat {
        linalg::matrix_of(self.dim_w(), |y| self.coords(&f(&self.from_coords(y))))
    }

    /// Gram matrix of the symplectic form on the standard real basis of `W`.
    pub fn symplectic_gram(&self) -> Mat {
        let alg = self.alg();
        let n = self.dim_w();
        let basis: Vec<DMatrix> = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                DMatrix::from_real_vec(alg, self.d_prime(), self.d(), &v).unwrap()
            })
            .collect();
        Mat::from_fn(n, n, |r, c| self.symplectic_form(&basis[r], &basis[c]).unwrap())
    }

    pub fn random_w<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix {
        let y: Vec<f64> = (0..self.dim_w()).map(|_| rng.sample(StandardNormal)).collect();
        self.from_coords(&y)
    }

    pub fn random_g_element<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix {
        let b = self.g_basis();
        let c: Vec<f64> = (0..b.dim()).map(|_| rng.sample(StandardNormal)).collect();
        if c.is_empty() {
            return DMatrix::zeros(self.alg(), self.d(), self.d());
        }
        b.combine(&c)
    }

    pub fn random_g_prime_element<R: Rng + ?Sized>(&self, rng: &mut R, basis: &LieAlgebraBasis) -> DMatrix {
        let c: Vec<f64> = (0..basis.dim()).map(|_| rng.sample(StandardNormal)).collect();
        basis.combine(&c)
    }

    /// A random element of `G'`, the exponential of a random element of `g'`
    /// of size about `scale`.
    pub fn random_g_prime<R: Rng + ?Sized>(&self, rng: &mut R, basis: &LieAlgebraBasis, scale: f64) -> DMatrix {
        self.random_g_prime_element(rng, basis).scale(scale).exp().expect("square")
    }

    /// Whether `g` lies in the isometry group `G'` of `F`.
    pub fn is_in_group_prime(&self, g: &DMatrix, tol: f64) -> bool {
        (&(&(&g.conj_transpose() * &self.f) * g) - &self.f).max_abs() <= tol
    }
}

/// `B(a, b) = tr_R(conj(b)^T a)`: `dim D` times the Euclidean product of coordinates.
pub fn b_inner(a: &DMatrix, b: &DMatrix) -> f64 {
    let dot: f64 = a.entries().iter().zip(b.entries()).map(|(x, y)| (0..4).map(|i| x.0[i] * y.0[i]).sum::<f64>()).sum();
    a.algebra().dim() as f64 * dot
}

pub fn b_norm(a: &DMatrix) -> f64 {
    b_inner(a, a).sqrt()
}

fn build_form(desc: PairDescriptor, m: usize) -> DMatrix {
    let alg = desc.algebra;
    let n = desc.d_prime;
    let r = n - 2 * m;
    let mut f = DMatrix::zeros(alg, n, n);
    for a in 0..m {
        f.set(a, n - m + a, DScalar::ONE);
        f.set(n - m + a, a, DScalar::real(-1.0));
    }
    let middle = match alg {
        Algebra::R => {
            let h = r / 2;
            let mut fm = DMatrix::zeros(alg, r, r);
            for a in 0..h {
                fm.set(a, h + a, DScalar::ONE);
                fm.set(h + a, a, DScalar::real(-1.0));
            }
            fm
        }
        Algebra::C => {
            // iF' = diag(I_{p-m}, -I_{q-m}) with (p, q) = (witt, d' - witt).
            let pm = desc.witt - m;
            DMatrix::from_fn(alg, r, r, |i, j| {
                if i != j {
                    DScalar::ZERO
                } else if i < pm {
                    DScalar::complex(0.0, -1.0)
                } else {
                    DScalar::complex(0.0, 1.0)
                }
            })
        }
        Algebra::H => DMatrix::identity(alg, r).left_scalar(DScalar::J),
    };
    f.set_block(m, m, &middle);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn catalog_forms() {
        for (name, desc) in catalog() {
            let p = DualPairSpec::named(name, desc).unwrap();
            let f = p.form();
            assert!(f.is_skew_hermitian(0.0), "{name}");
            let ff = f * f;
            assert!((&ff + &DMatrix::identity(p.alg(), p.d_prime())).max_abs() < 1e-14, "{name}");
            assert_eq!(p.g_basis().dim(), p.dim_g(), "{name}");
            assert_eq!(p.g_prime_basis().dim(), p.dim_g_prime(), "{name}");
        }
    }

    #[test]
    fn star_example() {
        let p = catalog_pair("O1_Sp2").unwrap();
        let w = DMatrix::from_fn(Algebra::R, 2, 1, |r, _| DScalar::real([3.0, 5.0][r]));
        let s = p.star(&w).unwrap();
        assert_eq!(s.get(0, 0).re(), -5.0);
        assert_eq!(s.get(0, 1).re(), 3.0);
        assert!(p.star(&DMatrix::zeros(Algebra::R, 1, 2)).is_err());
        assert!((p.symplectic_gram().determinant().abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn positivity_and_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (name, _) in catalog() {
            let p = catalog_pair(name).unwrap();
            for _ in 0..20 {
                let w = p.random_w(&mut rng);
                let wp = p.random_w(&mut rng);
                let b = p.b_form(&wp, &w).unwrap();
                let via_theta = -p.symplectic_form(&p.theta(&wp).unwrap(), &w).unwrap();
                assert!((b - via_theta).abs() < 1e-10, "{name}: {b} vs {via_theta}");
                assert!(p.b_form(&w, &w).unwrap() > 0.0);
                assert!(p.symplectic_form(&w, &w).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adapted_form_has_k_block() {
        let p = catalog_pair("O3_Sp8").unwrap();
        for k in 0..=p.m() {
            let a = p.adapted(k).unwrap();
            let f = a.form();
            let n = a.d_prime();
            for i in 0..k {
                assert_eq!(f.get(i, n - k + i), DScalar::ONE);
            }
            assert_eq!(a.g_prime_basis().dim(), p.dim_g_prime());
        }
    }

    #[test]
    fn descriptor_validation() {
        assert!(DualPairSpec::from_json(r#"{"algebra":"R","d":3,"d_prime":4,"witt":2}"#).is_ok());
        assert!(DualPairSpec::from_json(r#"{"algebra":"R","d":3,"d_prime":3,"witt":1}"#).is_err());
        assert!(DualPairSpec::from_json(r#"{"algebra":"C","d":1,"d_prime":2,"witt":2}"#).is_err());
        assert!(DualPairSpec::from_json(r#"{"algebra":"H","d":1,"d_prime":4,"witt":1}"#).is_err());
        assert!(DualPairSpec::from_json(r#"{"algebra":"X"}"#).is_err());
    }
}
