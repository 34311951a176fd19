//! Closed-form values checked against independent brute-force computations.

use std::f64::consts::PI;

use nalgebra::{DMatrix as Mat, DVector};
use num_complex::Complex64;
use orbitlab_core::limit::{schur_jacobi_trudi, weyl_dimension};
use orbitlab_core::measure::fmeasure::f_n_quadrature;
use orbitlab_core::measure::orbital::orbital_integral;
use orbitlab_core::measure::TestFunction;
use orbitlab_core::orbit::{orbit_dim_oracle, representative, stratum_dim_formula};
use orbitlab_core::quad::gauss_hermite;
use orbitlab_core::weil::CayleyChart;
use orbitlab_core::{catalog, catalog_pair, DualPairSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `int phi(y) chi_x(w(y)) dy` for `phi = exp(-pi y^T diag(q) y)` by a tensor Gauss-Hermite rule.
fn brute_pairing(chart: &CayleyChart, x: &orbitlab_core::DMatrix, q: &[f64], nodes: usize) -> Complex64 {
    let (u, wt) = gauss_hermite(nodes);
    let n = q.len();
    let scale: Vec<f64> = q.iter().map(|qi| 1.0 / (PI * qi).sqrt()).collect();
    let jac: f64 = scale.iter().product();
    let mut idx = vec![0usize; n];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let y: Vec<f64> = (0..n).map(|i| u[idx[i]] * scale[i]).collect();
        let w: f64 = (0..n).map(|i| wt[idx[i]]).product();
        let pt = chart.spec.from_coords(&y);
        total += chart.chi_x(x, &pt).unwrap() * w;
        let mut k = 0;
        loop {
            if k == n {
                return total * jac;
            }
            idx[k] += 1;
            if idx[k] < nodes {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn u1_pairing_matches_tensor_gauss_hermite() {
    let p = catalog_pair("U1_U11").unwrap();
    let chart = CayleyChart::new(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = [1.0, 1.5, 0.8, 2.0];
    let phi = TestFunction::gaussian(Mat::from_diagonal(&DVector::from_row_slice(&q)), DVector::zeros(4)).unwrap();
    for _ in 0..4 {
        let x = chart.random_x(&mut rng).scale(0.4);
        let closed = chart.gaussian_pairing(&x, &phi).unwrap();
        let brute = brute_pairing(&chart, &x, &q, 28);
        assert!((closed - brute).norm() < 1e-6, "closed {closed} brute {brute}");
    }
}

#[test]
fn o1_pairing_matches_tensor_gauss_hermite() {
    let p = catalog_pair("O1_Sp4").unwrap();
    let chart = CayleyChart::new(&p);
    // g is zero for O1; the pairing is just the integral
    let x = p.random_g_element(&mut ChaCha8Rng::seed_from_u64(0));
    let q = [1.0, 2.0, 0.5, 1.0];
    let phi = TestFunction::gaussian(Mat::from_diagonal(&DVector::from_row_slice(&q)), DVector::zeros(4)).unwrap();
    let closed = chart.gaussian_pairing(&x, &phi).unwrap();
    let brute = brute_pairing(&chart, &x, &q, 8);
    assert!((closed - brute).norm() < 1e-12 && (closed.re - 1.0).abs() < 1e-12);
}

/// Orbit dimensions from a finite-difference tangent space, independent of the library's tangent matrix.
fn fd_orbit_dim(p: &DualPairSpec, w: &orbitlab_core::DMatrix) -> usize {
    let gp = p.g_prime_basis();
    let g = p.g_basis();
    let h = 1e-6;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let id = orbitlab_core::DMatrix::identity(p.alg(), p.d());
    let idp = orbitlab_core::DMatrix::identity(p.alg(), p.d_prime());
    for b in &gp.vectors {
        let plus = p.act(&id, &b.scale(h).exp().unwrap(), w).unwrap();
        let minus = p.act(&id, &b.scale(-h).exp().unwrap(), w).unwrap();
        cols.push(p.coords(&(&plus - &minus)).iter().map(|v| v / (2.0 * h)).collect());
    }
    for b in &g.vectors {
        let plus = p.act(&b.scale(h).exp().unwrap(), &idp, w).unwrap();
        let minus = p.act(&b.scale(-h).exp().unwrap(), &idp, w).unwrap();
        cols.push(p.coords(&(&plus - &minus)).iter().map(|v| v / (2.0 * h)).collect());
    }
    if cols.is_empty() {
        return 0;
    }
    let m = Mat::from_fn(cols[0].len(), cols.len(), |r, c| cols[c][r]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > 1e-6 * top.max(1.0)).count()
}

#[test]
fn orbit_dimensions_match_finite_differences() {
    for (name, _) in catalog() {
        let p = catalog_pair(name).unwrap();
        for k in 1..=p.m() {
            let w = representative(&p, k).unwrap();
            let fd = fd_orbit_dim(&p, &w);
            assert_eq!(fd, orbit_dim_oracle(&p, &w), "{name} k={k}");
            assert_eq!(fd, stratum_dim_formula(&p, k).unwrap().dim_ok, "{name} k={k}");
        }
    }
}

#[test]
fn f_measures_closed_forms() {
    let want = [1.0, PI, 2.0 * PI];
    for n in 1..=3 {
        let q = f_n_quadrature(n, &TestFunction::standard(2 * n)).unwrap();
        assert!((q.value - want[n - 1]).abs() < 1e-8, "n={n}: {}", q.value);
    }
}

#[test]
fn o1_sp2_orbital_integral_by_polar_coordinates() {
    // The k = 1 orbit of (O1, Sp2) is R^2 minus the origin; with unit-mass Haar on K'
    // the measure is Lebesgue / pi.
    let p = catalog_pair("O1_Sp2").unwrap();
    let phi = TestFunction::gaussian(Mat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]), DVector::zeros(2)).unwrap();
    let mu = orbital_integral(&p, 1, &phi, 0, 0).unwrap().value;
    // polar quadrature of exp(-pi r^2 (a cos^2 + 2b cos sin + c sin^2)) = 1 / (a cos^2 + ...)
    let n = 2000;
    let s: f64 = (0..n)
        .map(|i| {
            let th = 2.0 * PI * (i as f64 + 0.5) / n as f64;
            let (c, sn) = (th.cos(), th.sin());
            1.0 / (2.0 * PI * (2.0 * c * c + 0.6 * c * sn + sn * sn)) * 2.0 * PI / n as f64
        })
        .sum();
    let direct = 1.0 / (2.0f64 * 1.0 - 0.09).sqrt();
    assert!((s - direct).abs() < 1e-12);
    assert!((mu * PI - direct).abs() < 1e-9, "mu {mu} vs {direct} / pi");
}

#[test]
fn schur_polynomials_against_monomial_expansion() {
    // s_(2,0)(a,b) = a^2 + ab + b^2, s_(1,1) = ab, s_(2,1) = a^2 b + a b^2
    let z = [Complex64::new(0.3, 0.7), Complex64::new(-1.1, 0.2)];
    let (a, b) = (z[0], z[1]);
    let cases: [(&[i64], Complex64); 3] = [(&[2, 0], a * a + a * b + b * b), (&[1, 1], a * b), (&[2, 1], a * a * b + a * b * b)];
    for (l, want) in cases {
        assert!((schur_jacobi_trudi(l, &z) - want).norm() < 1e-13, "{l:?}");
    }
    // character at the identity is the dimension
    for l in [[0i64, 0], [1, -1], [3, 0], [2, -1], [5, 2]] {
        let one = [Complex64::new(1.0, 0.0); 2];
        assert!((schur_jacobi_trudi(&l, &one).re - weyl_dimension(&l) as f64).abs() < 1e-9, "{l:?}");
    }
    assert_eq!(weyl_dimension(&[2, -1]), 4);
}
