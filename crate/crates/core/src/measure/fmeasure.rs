//! The invariant measure
//! `f_n(phi) = int_{SM_m} int_{M_{m,n}} phi([X; CX]) |det(X X^T)|^{(m+1-n)/2} dX dC`
//! on `M_{2m,n}(R)` (coordinates row-major), its sphere reduction and its
//! restriction to the slice through `N = [[I_m, 0], [0, 0]]`.

use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::measure::mc::{self, MCEstimate};
use crate::measure::sphere_area;
use crate::measure::testfn::{GaussPoly, TestFunction};
use crate::quad::{gauss_hermite, gauss_legendre_on};

fn check(m: usize, n: usize, phi: &TestFunction) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::OutOfRange(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if phi.dim != 2 * m * n {
        return Err(Error::Shape(format!("test function on R^{} but M_(2m,n) has dim {}", phi.dim, 2 * m * n)));
    }
    Ok(())
}

/// Homogeneity degree of `f_n`: `m(m+1) - 2mn`.
pub fn f_degree(m: usize, n: usize) -> i64 {
    (m * (m + 1)) as i64 - 2 * (m * n) as i64
}

/// Number of `C` coordinates (`i <= j`).
fn sym_dim(m: usize) -> usize {
    m * (m + 1) / 2
}

fn sym_from(m: usize, c: &[f64]) -> Mat {
    let mut s = Mat::zeros(m, m);
    let mut it = c.iter();
    for i in 0..m {
        for j in i..m {
            let v = *it.next().expect("coordinates");
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// `[X; CX]` flattened row-major.
fn stack(x: &Mat, c: &Mat) -> Vec<f64> {
    let y = c * x;
    let mut out = Vec::with_capacity(2 * x.len());
    for r in 0..x.nrows() {
        out.extend(x.row(r).iter());
    }
    for r in 0..y.nrows() {
        out.extend(y.row(r).iter());
    }
    out
}

fn density_power(m: usize, n: usize, x: &Mat) -> f64 {
    let g = x * x.transpose();
    g.determinant().abs().powf((m as f64 + 1.0 - n as f64) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadValue {
    pub value: f64,
    pub error: f64,
}

/// `m = 1`, `n <= 3`: with `c = tan u`, `x = rho cos u sigma` the measure becomes
/// `rho drho du dsigma` and the integrand `phi(rho (cos u sigma, sin u sigma))`.
pub fn f_n_quadrature(n: usize, phi: &TestFunction) -> Result<QuadValue> {
    check(1, n, phi)?;
    if n > 3 {
        return Err(Error::Unsupported("quadrature path covers n <= 3".into()));
    }
    let lam = phi.min_precision();
    let r_max = phi.max_center_norm() + (46.0 / (std::f64::consts::PI * lam)).sqrt();
    let coarse = f1_rule(n, phi, r_max, 2);
    let fine = f1_rule(n, phi, r_max, 3);
    Ok(QuadValue { value: fine, error: (fine - coarse).abs() })
}

fn sphere_rule(n: usize, level: usize) -> Vec<(Vec<f64>, f64)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    match n {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => {
            let k = 8 * level;
            (0..k).map(|i| {
                let a = two_pi * i as f64 / k as f64;
                (vec![a.cos(), a.sin()], two_pi / k as f64)
            })
            .collect()
        }
        _ => {
            let k = 8 * level;
            let (zs, wz) = gauss_legendre_on(6 * level, -1.0, 1.0);
            let mut out = Vec::new();
            for (z, wzi) in zs.iter().zip(&wz) {
                let s = (1.0 - z * z).sqrt();
                for i in 0..k {
                    let a = two_pi * i as f64 / k as f64;
                    out.push((vec![s * a.cos(), s * a.sin(), *z], wzi * two_pi / k as f64));
                }
            }
            out
        }
    }
}

fn f1_rule(n: usize, phi: &TestFunction, r_max: f64, level: usize) -> f64 {
    let h = std::f64::consts::FRAC_PI_2;
    let (us, wu) = gauss_legendre_on(16 * level, -h, h);
    let (rs, wr) = gauss_legendre_on(24 * level, 0.0, r_max);
    let sphere = sphere_rule(n, level);
    us.par_iter()
        .zip(wu.par_iter())
        .map(|(&u, &wui)| {
            let (cu, su) = (u.cos(), u.sin());
            let mut acc = 0.0;
            let mut v = vec![0.0; 2 * n];
            for (sig, ws) in &sphere {
                for (&rho, &wri) in rs.iter().zip(&wr) {
                    for j in 0..n {
                        v[j] = rho * cu * sig[j];
                        v[n + j] = rho * su * sig[j];
                    }
                    acc += ws * wri * rho * phi.eval_slice(&v);
                }
            }
            acc * wui
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

/// Importance sampling: entries of `C` Cauchy, then `X | C` Gaussian with
/// covariance `(2 pi 0.8 lambda (1 + C^2))^{-1}` per column.
pub fn f_n_mc(m: usize, n: usize, phi: &TestFunction, n_samples: usize, seed: u64) -> Result<MCEstimate> {
    check(m, n, phi)?;
    let lam = 0.8 * phi.min_precision();
    let q0 = &phi.terms[0].q;
    let half = m * n;
    let tr_x: f64 = (0..half).map(|i| q0[(i, i)]).sum();
    let tr_y: f64 = (half..2 * half).map(|i| q0[(i, i)]).sum();
    let gamma = (tr_x / tr_y).sqrt();
    let cauchy = Cauchy::new(0.0, gamma).expect("positive scale");
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(mc::run(n_samples, seed, |rng| {
        let cv: Vec<f64> = (0..sym_dim(m)).map(|_| cauchy.sample(rng)).collect();
        let log_qc: f64 = cv.iter().map(|c| (gamma / (std::f64::consts::PI * (c * c + gamma * gamma))).ln()).sum();
        let c = sym_from(m, &cv);
        let prec = (Mat::identity(m, m) + &c * &c) * (two_pi * lam);
        let eig = crate::linalg::sym_eigen(prec.clone());
        let inv_sqrt = &eig.eigenvectors * Mat::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt())) * eig.eigenvectors.transpose();
        let z = Mat::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = &inv_sqrt * &z;
        let log_det_prec: f64 = eig.eigenvalues.iter().map(|l| l.ln()).sum();
        let log_qx = -0.5 * z.norm_squared() + 0.5 * n as f64 * log_det_prec - 0.5 * (m * n) as f64 * two_pi.ln();
        let v = stack(&x, &c);
        density_power(m, n, &x) * phi.eval_slice(&v) * (-(log_qc + log_qx)).exp()
    }))
}

/// Quadrature for `m = 1, n <= 3`, Monte Carlo otherwise.
pub fn f_n_measure(m: usize, n: usize, phi: &TestFunction, n_samples: usize, seed: u64) -> Result<MCEstimate> {
    check(m, n, phi)?;
    if m == 1 && n <= 3 {
        let q = f_n_quadrature(n, phi)?;
        Ok(MCEstimate::exact(q.value, q.error.max(1e-15 * q.value.abs()), "quadrature"))
    } else {
        f_n_mc(m, n, phi, n_samples, seed)
    }
}

/// `g` acting on the left of `M_{2m,n}` as a map of `R^{2mn}` (row-major).
pub fn left_action(g: &Mat, n: usize) -> Mat {
    let r = g.nrows();
    Mat::from_fn(r * n, r * n, |a, b| if a % n == b % n { g[(a / n, b / n)] } else { 0.0 })
}

/// `h` acting on the right of `M_{2m,n}`.
pub fn right_action(h: &Mat, rows: usize) -> Mat {
    let n = h.nrows();
    Mat::from_fn(rows * n, rows * n, |a, b| if a / n == b / n { h[(b % n, a % n)] } else { 0.0 })
}

/// Five right-`O_n`-invariant test functions on `M_{2m,n}`: Gaussians with
/// forms `M (x) I_n` times polynomials in `tr(XX^T)`, `tr(XY^T)`, `tr(YY^T)`.
pub fn invariant_family(m: usize, n: usize) -> Vec<TestFunction> {
    let r = 2 * m;
    let dim = r * n;
    let ms: Vec<Mat> = vec![
        Mat::identity(r, r),
        Mat::from_fn(r, r, |i, j| if i == j { 1.5 - 0.4 * (i % 2) as f64 } else { 0.25 / (1.0 + (i + j) as f64) }),
        Mat::identity(r, r) * 0.6,
        Mat::from_fn(r, r, |i, j| if i == j { 0.8 + 0.3 * i as f64 } else { -0.2 / (1.0 + (i + j) as f64) }),
        Mat::identity(r, r) * 1.3,
    ];
    let forms = Mat::identity(dim, dim);
    let zeros = Vector::zeros(dim);
    let half = m * n;
    let xx: Vec<(f64, Vec<usize>)> = (0..half).map(|i| (1.0, vec![i, i])).collect();
    let xy: Vec<(f64, Vec<usize>)> = (0..half).map(|i| (1.0, vec![i, half + i])).collect();
    let yy: Vec<(f64, Vec<usize>)> = (0..half).map(|i| (1.0, vec![half + i, half + i])).collect();
    let product = |a: &[(f64, Vec<usize>)], b: &[(f64, Vec<usize>)]| -> Vec<(f64, Vec<usize>)> {
        let mut out = Vec::new();
        for (c1, i1) in a {
            for (c2, i2) in b {
                let mut i = i1.clone();
                i.extend(i2);
                out.push((c1 * c2, i));
            }
        }
        out
    };
    let mut polys: Vec<Vec<(f64, Vec<usize>)>> = vec![vec![(1.0, vec![])]; 5];
    polys[1] = xx.clone();
    polys[1].push((1.0, vec![]));
    polys[2] = product(&xy, &xy);
    polys[2].push((0.5, vec![]));
    polys[3] = product(&xx, &yy);
    polys[4] = yy.iter().cloned().chain(xy.iter().map(|(c, i)| (0.5 * c, i.clone()))).chain([(2.0, vec![])]).collect();
    ms.iter()
        .zip(polys)
        .map(|(mm, poly)| {
            let q = left_action(mm, n);
            let base = GaussPoly::gaussian(q, Vector::zeros(dim));
            TestFunction::from_terms(vec![base])
                .and_then(|f| if poly.len() == 1 && poly[0].1.is_empty() { Ok(f) } else { f.with_polynomial(&forms, &zeros, &poly) })
                .expect("valid family")
        })
        .collect()
}

/// Restriction of a function on `M_{2m,n}` to matrices with zero last column.
pub fn drop_last_column(phi: &TestFunction, m: usize, n: usize) -> Result<TestFunction> {
    let e = Mat::from_fn(2 * m * n, 2 * m * (n - 1), |a, b| {
        let (r, j) = (b / (n - 1), b % (n - 1));
        if a == r * n + j {
            1.0
        } else {
            0.0
        }
    });
    phi.restrict(&e)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereReductionReport {
    pub m: usize,
    pub n: usize,
    pub ratios: Vec<f64>,
    pub ratio_errors: Vec<f64>,
    pub empirical_constant: f64,
    /// `|S^{n-1}| / |S^{n-2}|`.
    pub sphere_ratio: f64,
    /// `|S^{n-1}|`, the constant claimed for the reduction.
    pub claimed_constant: f64,
    pub max_pairwise_sigma: f64,
    pub phi_independent: bool,
}

/// `f_n(phi) / f_{n-1}(phi restricted)` over the invariant family.
pub fn sphere_reduction_check(m: usize, n: usize, n_samples: usize, seed: u64) -> Result<SphereReductionReport> {
    if n <= m {
        return Err(Error::OutOfRange("sphere reduction needs n > m".into()));
    }
    let mut ratios = Vec::new();
    let mut errs = Vec::new();
    for (i, phi) in invariant_family(m, n).iter().enumerate() {
        let top = f_n_measure(m, n, phi, n_samples, seed.wrapping_add(2 * i as u64))?;
        let low = f_n_measure(m, n - 1, &drop_last_column(phi, m, n)?, n_samples, seed.wrapping_add(2 * i as u64 + 1))?;
        let r = top.value / low.value;
        ratios.push(r);
        errs.push(r.abs() * ((top.std_error / top.value).powi(2) + (low.std_error / low.value).powi(2)).sqrt());
    }
    let mut worst: f64 = 0.0;
    for i in 0..ratios.len() {
        for j in 0..i {
            let s = errs[i].hypot(errs[j]).max(1e-12 * ratios[i].abs());
            worst = worst.max((ratios[i] - ratios[j]).abs() / s);
        }
    }
    let wsum: f64 = errs.iter().map(|e| 1.0 / e.max(1e-15).powi(2)).sum();
    let empirical = ratios.iter().zip(&errs).map(|(r, e)| r / e.max(1e-15).powi(2)).sum::<f64>() / wsum;
    Ok(SphereReductionReport {
        m,
        n,
        ratios,
        ratio_errors: errs,
        empirical_constant: empirical,
        sphere_ratio: sphere_area(n - 1) / sphere_area(n - 2),
        claimed_constant: sphere_area(n - 1),
        max_pairwise_sigma: worst,
        phi_independent: worst < 3.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Bump {
    /// `amp * exp(-pi |v|^2 / width^2)`.
    Gaussian { amp: f64, width: f64 },
    /// `|v|^2 exp(-pi |v|^2 / width^2)`, vanishing at `N`.
    Quadratic { width: f64 },
}

impl Bump {
    pub fn at_origin(&self) -> f64 {
        match *self {
            Bump::Gaussian { amp, .. } => amp,
            Bump::Quadratic { .. } => 0.0,
        }
    }
}

/// Orthogonal projector onto `V = {[[0, 0], [D, u]]}` with `D` skew.
pub fn slice_projector(m: usize, n: usize) -> Mat {
    let dim = 2 * m * n;
    let idx = |r: usize, j: usize| r * n + j;
    let mut p = Mat::zeros(dim, dim);
    for i in 0..m {
        for j in 0..n {
            let a = idx(m + i, j);
            if j >= m {
                p[(a, a)] = 1.0;
            } else if i != j {
                // skew part of the left block: (Y - Y^T) / 2
                p[(a, a)] += 0.5;
                p[(a, idx(m + j, i))] -= 0.5;
            }
        }
    }
    p
}

/// `eps^{-dim U} exp(-pi |P_U (v - N)|^2 / eps^2) * bump(P_V v)`.
pub fn mollified(m: usize, n: usize, eps: f64, bump: Bump) -> Result<TestFunction> {
    let dim = 2 * m * n;
    let pv = slice_projector(m, n);
    let pu = Mat::identity(dim, dim) - &pv;
    let dim_u = m * n + sym_dim(m);
    let width = match bump {
        Bump::Gaussian { width, .. } | Bump::Quadratic { width } => width,
    };
    let q = &pu / (eps * eps) + &pv / (width * width);
    let mut center = Vector::zeros(dim);
    for i in 0..m {
        center[i * n + i] = 1.0;
    }
    let scale = eps.powi(-(dim_u as i32));
    let base = TestFunction::gaussian(q, center)?;
    match bump {
        Bump::Gaussian { amp, .. } => Ok(base.scale(scale * amp)),
        Bump::Quadratic { .. } => {
            let poly: Vec<(f64, Vec<usize>)> = (0..dim).map(|i| (scale, vec![i, i])).collect();
            base.with_polynomial(&pv, &Vector::zeros(dim), &poly)
        }
    }
}

/// `f_n(phi_eps)` by tensor Gauss-Hermite around `(X = [I, 0], C = 0)` with
/// width `eps` (at most 4 integration variables), importance sampling otherwise.
pub fn slice_restriction_mass(m: usize, n: usize, eps: f64, bump: Bump, n_samples: usize, seed: u64) -> Result<MCEstimate> {
    if !(eps > 0.0) {
        return Err(Error::OutOfRange("mollifier width must be positive".into()));
    }
    let phi = mollified(m, n, eps, bump)?;
    check(m, n, &phi)?;
    let nx = m * n;
    let dims = nx + sym_dim(m);
    let sigma = eps / std::f64::consts::PI.sqrt();
    let integrand = |s: &[f64]| -> f64 {
        let x = Mat::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 } + sigma * s[i * n + j]);
        let c = sym_from(m, &s[nx..].iter().map(|v| sigma * v).collect::<Vec<_>>());
        density_power(m, n, &x) * phi.eval_slice(&stack(&x, &c))
    };
    let jac = sigma.powi(dims as i32);
    if dims <= 4 {
        let coarse = gh_tensor(dims, 24, &integrand) * jac;
        let fine = gh_tensor(dims, 36, &integrand) * jac;
        return Ok(MCEstimate::exact(fine, (fine - coarse).abs(), "gauss-hermite"));
    }
    let norm = std::f64::consts::PI.powf(dims as f64 / 2.0);
    Ok(mc::run(n_samples, seed, |rng| {
        let s: Vec<f64> = (0..dims).map(|_| rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2).collect();
        let r2: f64 = s.iter().map(|v| v * v).sum();
        integrand(&s) * jac * norm * r2.exp()
    }))
}

fn gh_tensor(dims: usize, nodes: usize, f: &(impl Fn(&[f64]) -> f64 + Sync)) -> f64 {
    let (x, w) = gauss_hermite(nodes);
    let total = nodes.pow(dims as u32);
    (0..total)
        .into_par_iter()
        .map(|mut i| {
            let mut s = vec![0.0; dims];
            let mut wt = 1.0;
            for d in 0..dims {
                let k = i % nodes;
                i /= nodes;
                s[d] = x[k];
                wt *= w[k] * (x[k] * x[k]).exp();
            }
            wt * f(&s)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceMassReport {
    pub m: usize,
    pub n: usize,
    pub bump: Bump,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub rate: f64,
    pub spread: f64,
    /// `bump(N) * 2^{-m(m-1)/4}`, the limit predicted by a Dirac mass at `N`.
    pub predicted: f64,
}

/// Richardson extrapolation `f(eps) = L + b eps^alpha` over a halving sequence.
pub fn richardson3(f: [f64; 3], q: f64) -> (f64, f64) {
    let d1 = f[0] - f[1];
    let d2 = f[1] - f[2];
    if d2.abs() <= 1e-14 * f[2].abs().max(1e-300) || d1 / d2 <= 1.0 {
        return (f[2], f64::NAN);
    }
    let alpha = (d1 / d2).ln() / q.ln();
    (f[2] - d2 / (q.powf(alpha) - 1.0), alpha)
}

pub fn slice_mass_scan(m: usize, n: usize, bump: Bump, n_samples: usize, seed: u64) -> Result<SliceMassReport> {
    let eps = vec![0.2, 0.1, 0.05];
    let values: Vec<f64> = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| slice_restriction_mass(m, n, e, bump, n_samples, seed.wrapping_add(i as u64)).map(|v| v.value))
        .collect::<Result<_>>()?;
    let (limit, rate) = richardson3([values[0], values[1], values[2]], 2.0);
    let scale = if limit.abs() > 1e-12 { limit.abs() } else { 1.0 };
    let spread = values.iter().map(|v| (v - limit).abs()).fold(0.0, f64::max) / scale;
    Ok(SliceMassReport {
        m,
        n,
        bump,
        eps,
        values,
        limit,
        rate,
        spread,
        predicted: bump.at_origin() * 2f64.powf(-((m * (m - 1)) as f64) / 4.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms_by_quadrature() {
        for (n, want) in [(1, 1.0), (2, PI), (3, 2.0 * PI)] {
            let q = f_n_quadrature(n, &TestFunction::standard(2 * n)).unwrap();
            assert!((q.value - want).abs() < 1e-9 && q.error < 1e-9, "n={n}: {q:?}");
        }
    }

    #[test]
    fn closed_forms_by_mc() {
        for (n, want) in [(1, 1.0), (2, PI), (3, 2.0 * PI)] {
            let e = f_n_mc(1, n, &TestFunction::standard(2 * n), 200_000, 3).unwrap();
            assert!((e.value - want).abs() < 4.0 * e.std_error, "n={n}: {e:?}");
        }
    }

    #[test]
    fn sphere_reduction() {
        for n in [2, 3] {
            let r = sphere_reduction_check(1, n, 0, 0).unwrap();
            assert!(r.phi_independent, "{r:?}");
            assert!((r.empirical_constant - r.sphere_ratio).abs() < 1e-8);
        }
    }

    #[test]
    fn symplectic_and_orthogonal_invariance() {
        let phi = TestFunction::gaussian(Mat::identity(4, 4), Vector::from_vec(vec![0.3, -0.2, 0.1, 0.4])).unwrap();
        let base = f_n_quadrature(2, &phi).unwrap().value;
        let gens = [
            Mat::from_row_slice(2, 2, &[1.7, 0.0, 0.0, 1.0 / 1.7]),
            Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.6, 1.0]),
            Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        ];
        for g in gens {
            let v = f_n_quadrature(2, &phi.compose(&left_action(&g, 2)).unwrap()).unwrap().value;
            assert!((v - base).abs() < 1e-7 * base, "{v} vs {base}");
        }
        let t: f64 = 0.7;
        let h = Mat::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let v = f_n_quadrature(2, &phi.compose(&right_action(&h, 2)).unwrap()).unwrap().value;
        assert!((v - base).abs() < 1e-7 * base);
    }

    #[test]
    fn slice_mass_is_a_dirac_mass() {
        let r = slice_mass_scan(1, 2, Bump::Gaussian { amp: 1.0, width: 1.0 }, 0, 0).unwrap();
        assert!(r.spread < 0.1 && (r.limit - 1.0).abs() < 1e-3, "{r:?}");
        let r2 = slice_mass_scan(1, 2, Bump::Gaussian { amp: 2.0, width: 1.0 }, 0, 0).unwrap();
        assert!((r2.limit - 2.0 * r.limit).abs() < 1e-9);
        let z = slice_mass_scan(1, 2, Bump::Quadratic { width: 1.0 }, 0, 0).unwrap();
        assert!(z.limit.abs() < 1e-3, "{z:?}");
    }
}
