//! The slice `N + [s_0, N]^{perp_B}` through the rank-k nilpotent `w_k`, its
//! splitting `R_N + W_N`, and the dilations `g_t`.
//!
//! With `F` in block form for `k`, a slice point is
//! `[[I_k, 0], [0, w5], [w3, w6]]` (row blocks of sizes `k, d'-2k, k`, column
//! blocks `k, d-k`) with `w3` skew-hermitian.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{herm_skew_dims, matrix_basis, skew_hermitian_basis, DMatrix, DScalar};
use crate::dual_pair::{b_inner, b_norm, DualPairSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::orbit::{self, RANK_CUTOFF};

#[derive(Clone, Debug)]
pub struct SliceChart {
    pub k: usize,
    pub spec: DualPairSpec,
    pub n: DMatrix,
    pub basis_w3: Vec<DMatrix>,
    pub basis_w6: Vec<DMatrix>,
    pub basis_w_n: Vec<DMatrix>,
}

impl SliceChart {
    pub fn basis_r_n(&self) -> Vec<DMatrix> {
        self.basis_w3.iter().chain(&self.basis_w6).cloned().collect()
    }

    /// All slice directions: `R_N` first, then `W_N`.
    pub fn basis(&self) -> Vec<DMatrix> {
        let mut b = self.basis_r_n();
        b.extend(self.basis_w_n.iter().cloned());
        b
    }

    pub fn dim(&self) -> usize {
        self.basis_w3.len() + self.basis_w6.len() + self.basis_w_n.len()
    }

    pub fn dim_r_n(&self) -> usize {
        self.basis_w3.len() + self.basis_w6.len()
    }

    pub fn dim_w_n(&self) -> usize {
        self.basis_w_n.len()
    }

    fn sizes(&self) -> (usize, usize, usize) {
        (self.k, self.spec.d_prime() - 2 * self.k, self.spec.d() - self.k)
    }

    /// Slice displacement `v` from coordinates in `basis()`.
    pub fn vector(&self, coeffs: &[f64]) -> DMatrix {
        let mut v = self.spec.zero_w();
        for (c, b) in coeffs.iter().zip(self.basis()) {
            v = &v + &b.scale(*c);
        }
        v
    }

    pub fn random_r_n<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix {
        combine(&self.spec, &self.basis_r_n(), rng)
    }

    pub fn random_w_n<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix {
        combine(&self.spec, &self.basis_w_n, rng)
    }

    pub fn random_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix {
        combine(&self.spec, &self.basis(), rng)
    }

    /// The blocks `(w3, w5, w6)` of a slice displacement.
    pub fn blocks(&self, v: &DMatrix) -> (DMatrix, DMatrix, DMatrix) {
        let (k, mid, rest) = self.sizes();
        (v.block(k + mid, 0, k, k), v.block(k, k, mid, rest), v.block(k + mid, k, k, rest))
    }
}

fn combine<R: Rng + ?Sized>(p: &DualPairSpec, basis: &[DMatrix], rng: &mut R) -> DMatrix {
    let mut v = p.zero_w();
    for b in basis {
        let c: f64 = rng.sample(StandardNormal);
        v = &v + &b.scale(c);
    }
    v
}

fn placed(p: &DualPairSpec, r0: usize, c0: usize, b: &DMatrix) -> DMatrix {
    let mut w = p.zero_w();
    w.set_block(r0, c0, b);
    w
}

pub fn build_slice(p: &DualPairSpec, k: usize) -> Result<SliceChart> {
    let spec = p.adapted(k)?;
    let n = orbit::representative(&spec, k)?;
    let (alg, d, dp) = (p.alg(), p.d(), p.d_prime());
    let mid = dp - 2 * k;
    let basis_w3 = skew_hermitian_basis(alg, k).iter().map(|b| placed(&spec, k + mid, 0, b)).collect();
    let basis_w6 = matrix_basis(alg, k, d - k).iter().map(|b| placed(&spec, k + mid, k, b)).collect();
    let basis_w_n = matrix_basis(alg, mid, d - k).iter().map(|b| placed(&spec, k, k, b)).collect();
    Ok(SliceChart { k, spec, n, basis_w3, basis_w6, basis_w_n })
}

/// `tau(N + v)` assembled from the blocks: `[[2 w3, w6], [-w6^*, w5^* F' w5]]`.
pub fn tau_on_slice(chart: &SliceChart, v: &DMatrix) -> DMatrix {
    let (w3, w5, w6) = chart.blocks(v);
    let (k, _, rest) = chart.sizes();
    let mut out = DMatrix::zeros(chart.spec.alg(), k + rest, k + rest);
    out.set_block(0, 0, &w3.scale(2.0));
    out.set_block(0, k, &w6);
    out.set_block(k, 0, &-&w6.conj_transpose());
    out.set_block(k, k, &(&(&w5.conj_transpose() * &chart.spec.form_middle()) * &w5));
    out
}

/// `tau_N(w) = w^* F' w` on `W_N`, placed in the lower-right block of `g`.
pub fn tau_n(chart: &SliceChart, w: &DMatrix) -> DMatrix {
    let (_, w5, _) = chart.blocks(w);
    let (k, _, rest) = chart.sizes();
    let mut out = DMatrix::zeros(chart.spec.alg(), k + rest, k + rest);
    out.set_block(k, k, &(&(&w5.conj_transpose() * &chart.spec.form_middle()) * &w5));
    out
}

/// B-orthonormal basis of `g_N^{perp_B}`: skew-hermitian blocks in the corner
/// and `[[0, E], [-E^*, 0]] / sqrt 2`.
pub fn g_n_perp_basis(chart: &SliceChart) -> Vec<DMatrix> {
    let (alg, d, k) = (chart.spec.alg(), chart.spec.d(), chart.k);
    let mut out: Vec<DMatrix> = skew_hermitian_basis(alg, k)
        .into_iter()
        .map(|b| {
            let mut x = DMatrix::zeros(alg, d, d);
            x.set_block(0, 0, &b);
            x
        })
        .collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for e in matrix_basis(alg, k, d - k) {
        let mut x = DMatrix::zeros(alg, d, d);
        x.set_block(0, k, &e.scale(s));
        x.set_block(k, 0, &(-&e.conj_transpose()).scale(s));
        out.push(x);
    }
    out
}

/// `(dim g_N, dim g_N^{perp})` with `g_N` the numerical stabilizer of `N` in `g`.
pub fn g_n_dims(chart: &SliceChart) -> (usize, usize) {
    let gb = chart.spec.g_basis();
    if gb.dim() == 0 {
        return (0, 0);
    }
    let cols: Vec<Vector> = gb.vectors.iter().map(|x| Vector::from_vec((&chart.n * x).to_real_vec())).collect();
    let rank = linalg::numerical_rank(&Mat::from_columns(&cols), RANK_CUTOFF);
    (gb.dim() - rank, rank)
}

/// Matrix of `v -> tau(N + v)` from the `R_N` basis to the `g_N^perp` basis.
pub fn slice_map_matrix(chart: &SliceChart) -> Result<Mat> {
    let src = chart.basis_r_n();
    let dst = g_n_perp_basis(chart);
    if src.len() != dst.len() {
        return Err(Error::Shape(format!("R_N has dim {} but g_N^perp has dim {}", src.len(), dst.len())));
    }
    let images: Vec<DMatrix> = src
        .iter()
        .map(|v| chart.spec.moment_tau(&(&chart.n + v)))
        .collect::<Result<_>>()?;
    Ok(Mat::from_fn(dst.len(), src.len(), |r, c| b_inner(&images[c], &dst[r])))
}

/// `|det|` of `v -> tau(N + v)` from `R_N` onto `g_N^perp`; requires `k = m`.
pub fn slice_map_det(chart: &SliceChart) -> Result<f64> {
    require_max(chart)?;
    let m = slice_map_matrix(chart)?;
    Ok(if m.nrows() == 0 { 1.0 } else { m.determinant().abs() })
}

/// `2^{dim SH_m} * sqrt(2)^{dim M_{m, d-m}}`.
pub fn slice_map_det_closed_form(p: &DualPairSpec) -> f64 {
    let m = p.m();
    let (_, sh) = herm_skew_dims(p.alg(), m);
    let off = p.alg().dim() * m * (p.d() - m);
    2f64.powf(sh as f64 + 0.5 * off as f64)
}

fn require_max(chart: &SliceChart) -> Result<()> {
    if chart.k != chart.spec.m() {
        return Err(Error::Unsupported(format!("needs k = m = {}, got k = {}", chart.spec.m(), chart.k)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditivityResidual {
    pub residual: f64,
    /// `|B(tau(N+v), tau_N(w))|`.
    pub cross: f64,
    /// Distance of `tau(N+v)` from `g_N^perp` and of `tau_N(w)` from `g_N`.
    pub placement: f64,
}

/// Checks `tau(N + v + w) = tau(N + v) + tau_N(w)` for `v` in `R_N`, `w` in `W_N`.
pub fn tau_additivity_check(chart: &SliceChart, v: &DMatrix, w: &DMatrix) -> Result<AdditivityResidual> {
    require_max(chart)?;
    let p = &chart.spec;
    let a = p.moment_tau(&(&(&chart.n + v) + w))?;
    let b = p.moment_tau(&(&chart.n + v))?;
    let c = tau_n(chart, w);
    let residual = b_norm(&(&(&a - &b) - &c));
    let cross = b_inner(&b, &c).abs();
    let (k, _, rest) = chart.sizes();
    let placement = b_norm(&b.block(k, k, rest, rest))
        + b_norm(&c.block(0, 0, k, k))
        + b_norm(&c.block(0, k, k, rest))
        + b_norm(&c.block(k, 0, rest, k));
    Ok(AdditivityResidual { residual, cross, placement })
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange(format!("dilation parameter must be positive, got {t}")));
    }
    Ok(())
}

/// The row scaling `s_t = diag(t^{-1} I_k, I, t I_k)`, an element of `G'`.
pub fn s_t(chart: &SliceChart, t: f64) -> DMatrix {
    let (k, mid, _) = chart.sizes();
    let dp = chart.spec.d_prime();
    DMatrix::from_fn(chart.spec.alg(), dp, dp, |r, c| {
        if r != c {
            DScalar::ZERO
        } else if r < k {
            DScalar::real(1.0 / t)
        } else if r < k + mid {
            DScalar::ONE
        } else {
            DScalar::real(t)
        }
    })
}

/// `g_t(u) = t s_t u`; fixes `N` and scales the blocks `(w3, w5, w6)` by `(t^2, t, t^2)`.
pub fn apply_gt(chart: &SliceChart, t: f64, u: &DMatrix) -> Result<DMatrix> {
    check_t(t)?;
    Ok((&s_t(chart, t) * u).scale(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtJacobians {
    pub det_w: f64,
    pub det_slice: f64,
    pub closed_w: f64,
    pub closed_slice: f64,
}

/// Numerical determinants of `g_t` on `W` and on the slice directions, with the
/// closed forms `t^{dim W}` and `t^{dim W - dim O'_k}`.
pub fn gt_jacobians(chart: &SliceChart, t: f64) -> Result<GtJacobians> {
    check_t(t)?;
    let p = &chart.spec;
    let st = s_t(chart, t);
    let on_w = p.w_operator(|w| (&st * w).scale(t));
    let basis = chart.basis();
    let on_slice = Mat::from_fn(basis.len(), basis.len(), |r, c| b_inner(&(&st * &basis[c]).scale(t), &basis[r]));
    let dim_w = p.dim_w() as f64;
    let dim_op = orbit::stratum_dim_formula(p, chart.k)?.dim_ok_prime as f64;
    Ok(GtJacobians {
        det_w: on_w.determinant(),
        det_slice: if basis.is_empty() { 1.0 } else { on_slice.determinant() },
        closed_w: t.powf(dim_w),
        closed_slice: t.powf(dim_w - dim_op),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialFit {
    pub slope_w: f64,
    pub residual_w: f64,
    pub slope_slice: f64,
    pub residual_slice: f64,
    pub expected_w: i64,
    pub expected_slice: i64,
}

/// Least-squares fit of `log det` against `log t`.
pub fn gt_log_det_fit(chart: &SliceChart, ts: &[f64]) -> Result<MonomialFit> {
    let mut lx = Vec::new();
    let (mut lw, mut ls) = (Vec::new(), Vec::new());
    for &t in ts {
        let j = gt_jacobians(chart, t)?;
        lx.push(t.ln());
        lw.push(j.det_w.abs().ln());
        ls.push(j.det_slice.abs().ln());
    }
    let (sw, iw, rw) = linalg::line_fit(&lx, &lw);
    let (ss, is, rs) = linalg::line_fit(&lx, &ls);
    let p = &chart.spec;
    let dim_op = orbit::stratum_dim_formula(p, chart.k)?.dim_ok_prime as i64;
    Ok(MonomialFit {
        slope_w: sw,
        residual_w: rw.max(iw.abs()),
        slope_slice: ss,
        residual_slice: rs.max(is.abs()),
        expected_w: p.dim_w() as i64,
        expected_slice: p.dim_w() as i64 - dim_op,
    })
}

/// `|g_t(s.u) - (s_t s s_t^{-1}).(g_t u)|` for `s = (g, g')`.
pub fn equivariance_check(chart: &SliceChart, t: f64, g: &DMatrix, gp: &DMatrix, u: &DMatrix) -> Result<f64> {
    let p = &chart.spec;
    let lhs = apply_gt(chart, t, &p.act(g, gp, u)?)?;
    let st = s_t(chart, t);
    let conj = &(&st * gp) * &st.inverse()?;
    let rhs = p.act(g, &conj, &apply_gt(chart, t, u)?)?;
    Ok(b_norm(&(&lhs - &rhs)))
}

/// Rank of `(x, x', y) -> x'u - ux + y` with `y` in the slice directions.
pub fn u_membership_rank(chart: &SliceChart, u: &DMatrix) -> usize {
    let p = &chart.spec;
    let tangent = orbit::tangent_matrix(p, u);
    let mut cols: Vec<Vector> = tangent.column_iter().map(|c| c.into_owned()).collect();
    cols.extend(chart.basis().iter().map(|b| Vector::from_vec(p.coords(b))));
    linalg::numerical_rank(&Mat::from_columns(&cols), RANK_CUTOFF)
}

/// Largest `|B(b, t)|` between a slice direction and a tangent vector at `N`.
pub fn tangent_orthogonality(chart: &SliceChart) -> f64 {
    let p = &chart.spec;
    let tangent = orbit::tangent_matrix(p, &chart.n);
    let mut worst: f64 = 0.0;
    for b in chart.basis() {
        let y = Vector::from_vec(p.coords(&b));
        for c in tangent.column_iter() {
            worst = worst.max(y.dot(&c).abs());
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceStructure {
    pub dim_slice: usize,
    pub dim_slice_formula: usize,
    pub dim_w_minus_orbit: usize,
    pub dim_r_n: usize,
    pub dim_w_n: usize,
    pub gram_error: f64,
    pub tangent_orthogonality: f64,
    pub r_w_orthogonality: f64,
    pub r_n_isotropy: f64,
    /// Smallest singular value of the symplectic Gram matrix on `W_N` (1 if empty).
    pub w_n_nondegeneracy: f64,
    pub anticommutation: f64,
    pub u_rank: usize,
}

pub fn slice_structure(chart: &SliceChart) -> Result<SliceStructure> {
    let p = &chart.spec;
    let basis = chart.basis();
    let n = basis.len();
    let mut gram_error: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let e = if i == j { 1.0 } else { 0.0 };
            gram_error = gram_error.max((b_inner(&basis[i], &basis[j]) - e).abs());
        }
    }
    let r = chart.basis_r_n();
    let w = &chart.basis_w_n;
    let mut r_w: f64 = 0.0;
    let mut iso: f64 = 0.0;
    for a in &r {
        for b in w {
            r_w = r_w.max(b_inner(a, b).abs());
        }
        for b in &r {
            iso = iso.max(p.symplectic_form(a, b)?.abs());
        }
    }
    let nondeg = if w.is_empty() {
        1.0
    } else {
        let g = Mat::from_fn(w.len(), w.len(), |i, j| p.symplectic_form(&w[i], &w[j]).unwrap());
        g.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let theta_n = p.theta(&chart.n)?;
    let mut anti: f64 = 0.0;
    for b in w {
        for z in [&chart.n, &theta_n] {
            let bs = p.star(b)?;
            let zs = p.star(z)?;
            anti = anti.max((&(z * &bs) + &(b * &zs)).max_abs());
            anti = anti.max((&(&zs * b) + &(&bs * z)).max_abs());
        }
    }
    let (alg, k) = (p.alg(), chart.k);
    let (_, sh) = herm_skew_dims(alg, k);
    let dd = alg.dim();
    let formula = sh + dd * (p.d_prime() - 2 * k) * (p.d() - k) + dd * k * (p.d() - k);
    Ok(SliceStructure {
        dim_slice: n,
        dim_slice_formula: formula,
        dim_w_minus_orbit: p.dim_w() - orbit::orbit_dim_oracle(p, &chart.n),
        dim_r_n: chart.dim_r_n(),
        dim_w_n: chart.dim_w_n(),
        gram_error,
        tangent_orthogonality: tangent_orthogonality(chart),
        r_w_orthogonality: r_w,
        r_n_isotropy: iso,
        w_n_nondegeneracy: nondeg,
        anticommutation: anti,
        u_rank: u_membership_rank(chart, &chart.n),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropernessReport {
    pub radius: f64,
    pub samples: usize,
    pub max_norm: f64,
    pub bound: f64,
    /// `c` in `|w5^* F' w5| >= c |w5|^2` (infinite when `W_N = 0`).
    pub coercivity: f64,
    pub within_bound: bool,
}

/// Samples slice points with `|tau(N + v)| <= R` along random rays and reports
/// the largest `|v|` together with the a-priori bound from the block maps.
pub fn properness_probe<R: Rng + ?Sized>(chart: &SliceChart, radius: f64, samples: usize, rng: &mut R) -> Result<PropernessReport> {
    require_max(chart)?;
    let p = &chart.spec;
    let alg = p.alg();
    let rest = p.d() - chart.k;
    let coercivity = if chart.dim_w_n() == 0 {
        f64::INFINITY
    } else {
        let fm = p.form_middle();
        let lam = match alg {
            crate::Algebra::C => {
                let h = linalg::CMat::from_fn(fm.rows(), fm.cols(), |r, c| {
                    let z = fm.get(r, c);
                    num_complex::Complex64::new(-z.0[1], z.0[0])
                });
                linalg::hermitian_eigenvalues(&h).iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
            }
            _ => 1.0,
        };
        lam / ((alg.dim() * rest) as f64).sqrt()
    };
    let bound = if radius == 0.0 {
        0.0
    } else {
        let c_term = if coercivity.is_finite() { radius / coercivity } else { 0.0 };
        ((radius / 2.0).powi(2) + radius * radius / 2.0 + c_term).sqrt()
    };
    let mut max_norm: f64 = 0.0;
    for _ in 0..samples {
        let v = chart.random_vector(rng);
        let nv = b_norm(&v);
        if nv == 0.0 {
            continue;
        }
        let u = v.scale(1.0 / nv);
        let (w3, w5, w6) = chart.blocks(&u);
        let fm = p.form_middle();
        let a = b_norm(&w3.scale(2.0)).powi(2) + 2.0 * b_norm(&w6).powi(2);
        let b = b_norm(&(&(&w5.conj_transpose() * &fm) * &w5)).powi(2);
        let rho: f64 = radius * rng.gen::<f64>();
        // Solve a s^2 + b s^4 = rho^2 for s >= 0.
        let s2 = if b > 1e-300 { (-a + (a * a + 4.0 * b * rho * rho).sqrt()) / (2.0 * b) } else if a > 0.0 { rho * rho / a } else { 0.0 };
        let s = s2.max(0.0).sqrt();
        let w = &chart.n + &u.scale(s);
        let tau = p.moment_tau(&w)?;
        if b_norm(&tau) <= radius * (1.0 + 1e-9) + 1e-12 {
            max_norm = max_norm.max(s);
        }
    }
    Ok(PropernessReport {
        radius,
        samples,
        max_norm,
        bound,
        coercivity,
        within_bound: max_norm <= bound * (1.0 + 1e-9) + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_pair::{catalog, catalog_pair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn slice_dims_and_structure() {
        for (name, _) in catalog() {
            let p = catalog_pair(name).unwrap();
            for k in 0..=p.m() {
                let c = build_slice(&p, k).unwrap();
                let s = slice_structure(&c).unwrap();
                assert_eq!(s.dim_slice, s.dim_slice_formula, "{name} k={k}");
                assert_eq!(s.dim_slice, s.dim_w_minus_orbit, "{name} k={k}");
                assert!(s.gram_error < 1e-12 && s.tangent_orthogonality < 1e-12, "{name} k={k}");
                assert!(s.r_w_orthogonality < 1e-12 && s.r_n_isotropy < 1e-12);
                assert!(s.anticommutation < 1e-12 && s.w_n_nondegeneracy > 0.5, "{name} k={k}");
                assert_eq!(s.u_rank, p.dim_w());
            }
        }
        let c = build_slice(&catalog_pair("O3_Sp4").unwrap(), 2).unwrap();
        assert_eq!((c.basis_w3.len(), c.basis_w6.len(), c.dim_w_n()), (1, 2, 0));
        let c = build_slice(&catalog_pair("U2_U11").unwrap(), 1).unwrap();
        assert_eq!((c.dim(), c.dim_w_n()), (3, 0));
    }

    #[test]
    fn tau_blocks_and_slice_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (name, _) in catalog() {
            let p = catalog_pair(name).unwrap();
            let c = build_slice(&p, p.m()).unwrap();
            for _ in 0..10 {
                let v = c.random_vector(&mut rng);
                let a = tau_on_slice(&c, &v);
                let b = c.spec.moment_tau(&(&c.n + &v)).unwrap();
                assert!((&a - &b).max_abs() < 1e-12, "{name}");
                let r = tau_additivity_check(&c, &c.random_r_n(&mut rng), &c.random_w_n(&mut rng)).unwrap();
                assert!(r.residual < 1e-12 && r.cross < 1e-12 && r.placement < 1e-12, "{name}");
            }
            let det = slice_map_det(&c).unwrap();
            assert!((det - slice_map_det_closed_form(&p)).abs() < 1e-9 * det, "{name}: {det}");
            let (gn, gperp) = g_n_dims(&c);
            assert_eq!(gperp, c.dim_r_n());
            assert_eq!(gn + gperp, p.dim_g());
        }
        assert!(slice_map_det(&build_slice(&catalog_pair("O1_Sp2").unwrap(), 0).unwrap()).is_err());
        for (n, v) in [("O1_Sp2", 1.0), ("O2_Sp4", 2.0), ("O3_Sp4", 4.0)] {
            let p = catalog_pair(n).unwrap();
            assert_eq!(slice_map_det(&build_slice(&p, p.m()).unwrap()).unwrap().round(), v);
        }
    }

    #[test]
    fn slice_map_matrix_is_diagonal() {
        let p = catalog_pair("O3_Sp4").unwrap();
        let m = slice_map_matrix(&build_slice(&p, 2).unwrap()).unwrap();
        let s2 = 2f64.sqrt();
        let want = Mat::from_diagonal(&Vector::from_vec(vec![2.0, s2, s2]));
        assert!((m - want).norm() < 1e-12);
    }

    #[test]
    fn dilations() {
        let p = catalog_pair("O3_Sp4").unwrap();
        let c = build_slice(&p, 2).unwrap();
        let j = gt_jacobians(&c, 2.0).unwrap();
        assert_eq!((j.closed_w, j.closed_slice), (4096.0, 64.0));
        assert!((j.det_w - 4096.0).abs() < 1e-8 && (j.det_slice - 64.0).abs() < 1e-10);
        let f = gt_log_det_fit(&c, &[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!((f.slope_w - 12.0).abs() < 1e-10 && (f.slope_slice - 6.0).abs() < 1e-10);
        assert!(apply_gt(&c, 0.0, &c.n).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = &c.n + &c.random_vector(&mut rng);
        let lhs = p.moment_tau(&apply_gt(&c, 0.5, &u).unwrap()).unwrap();
        let rhs = p.moment_tau(&u).unwrap().scale(0.25);
        assert!((&lhs - &rhs).max_abs() < 1e-12);
        assert!((&apply_gt(&c, 3.0, &c.n).unwrap() - &c.n).max_abs() < 1e-15);
        let gb = p.g_prime_basis();
        for _ in 0..5 {
            let g = p.random_g_element(&mut rng).exp().unwrap();
            let gp = p.random_g_prime(&mut rng, &gb, 0.3);
            assert!(equivariance_check(&c, 1.7, &g, &gp, &u).unwrap() < 1e-10);
        }
    }

    #[test]
    fn properness() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for name in ["O3_Sp4", "U2_U11", "U2_U12", "Sp2_Ostar6"] {
            let p = catalog_pair(name).unwrap();
            let c = build_slice(&p, p.m()).unwrap();
            let r = properness_probe(&c, 10.0, 500, &mut rng).unwrap();
            assert!(r.within_bound && r.max_norm > 0.0, "{name}: {r:?}");
            let r = properness_probe(&c, 0.0, 10, &mut rng).unwrap();
            assert_eq!(r.max_norm, 0.0);
        }
        let p = catalog_pair("O3_Sp4").unwrap();
        assert!(properness_probe(&build_slice(&p, 1).unwrap(), 1.0, 1, &mut rng).is_err());
    }
}
