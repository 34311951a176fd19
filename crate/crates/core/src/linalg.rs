//! Small real and complex linear-algebra helpers on top of nalgebra.

use nalgebra as na;
use num_complex::Complex64;

pub type Mat = na::DMatrix<f64>;
pub type Vector = na::DVector<f64>;
pub type CMat = na::DMatrix<Complex64>;

/// Symmetric (hermitian) eigendecomposition, checked by recomposition.
///
/// nalgebra 0.33 can stop deflating too early on matrices with clustered
/// spectrum, returning a decomposition that does not recompose; retry with a
/// tighter off-diagonal threshold when that happens.
pub fn sym_eigen<T: na::ComplexField<RealField = f64>>(m: na::DMatrix<T>) -> na::SymmetricEigen<T, na::Dyn> {
    let scale = m.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let resid = |e: &na::SymmetricEigen<T, na::Dyn>| {
        let r = e.recompose();
        let mut worst: f64 = 0.0;
        for j in 0..m.ncols() {
            for i in j..m.nrows() {
                worst = worst.max((r[(i, j)].clone() - m[(i, j)].clone()).modulus());
            }
        }
        worst / scale
    };
    let first = m.clone().symmetric_eigen();
    if resid(&first) < 1e-11 {
        return first;
    }
    match m.clone().try_symmetric_eigen(1e-22, 100_000) {
        Some(e) if resid(&e) < resid(&first) => e,
        _ => first,
    }
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &Mat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormal basis of the kernel of `m`, as columns.
pub fn null_space(m: &Mat, rel_tol: f64) -> Mat {
    let n = m.ncols();
    // Pad to at least n rows so the SVD returns a full right-singular basis.
    let rows = m.nrows().max(n);
    let mut a = Mat::zeros(rows, n);
    a.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<Vector> = (0..n)
        .filter(|&i| svd.singular_values[i] <= rel_tol * smax || smax == 0.0)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        return Mat::zeros(n, 0);
    }
    Mat::from_columns(&cols)
}

/// Matrix of a linear map `R^n_in -> R^n_out` given as a closure.
pub fn matrix_of(n_in: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Mat {
    let mut cols = Vec::with_capacity(n_in);
    let mut e = vec![0.0; n_in];
    for i in 0..n_in {
        e[i] = 1.0;
        cols.push(Vector::from_vec(f(&e)));
        e[i] = 0.0;
    }
    if cols.is_empty() {
        return Mat::zeros(0, 0);
    }
    Mat::from_columns(&cols)
}

/// For an orthogonal complex structure `j` on `R^n` returns vectors
/// `e_1..e_{n/2}` such that `{e_k, j e_k}` is an orthonormal basis.
pub fn complex_structure_basis(j: &Mat) -> Vec<Vector> {
    let n = j.nrows();
    let mut found: Vec<Vector> = Vec::new();
    let mut span: Vec<Vector> = Vec::new();
    for i in 0..n {
        if found.len() * 2 == n {
            break;
        }
        let mut v = Vector::zeros(n);
        v[i] = 1.0;
        for _ in 0..2 {
            for u in &span {
                let p = u.dot(&v);
                v -= u * p;
            }
        }
        let nv = v.norm();
        if nv < 1e-8 {
            continue;
        }
        v /= nv;
        let mut jv = j * &v;
        // jv is orthogonal to v and to span already when j is orthogonal; clean up rounding.
        for u in span.iter().chain(std::iter::once(&v)) {
            let p = u.dot(&jv);
            jv -= u * p;
        }
        jv /= jv.norm();
        span.push(v.clone());
        span.push(jv);
        found.push(v);
    }
    found
}

/// Complex matrix of a real operator `a` commuting with `j`, in the complex
/// basis `basis` (from `complex_structure_basis`): `a e_k = sum_j Re(c_jk) e_j + Im(c_jk) j e_j`.
pub fn complexify(a: &Mat, j: &Mat, basis: &[Vector]) -> CMat {
    let n = basis.len();
    let jb: Vec<Vector> = basis.iter().map(|e| j * e).collect();
    CMat::from_fn(n, n, |r, c| {
        let ae = a * &basis[c];
        Complex64::new(basis[r].dot(&ae), jb[r].dot(&ae))
    })
}

/// Eigenvalues of a hermitian complex matrix, ascending.
pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let eig = sym_eigen(h.clone());
    let mut v: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Symmetric part `(m + m^T) / 2`.
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Least-squares line fit; returns `(slope, intercept, max_abs_residual)`.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icpt = my - slope * mx;
    let res = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).abs()).fold(0.0, f64::max);
    (slope, icpt, res)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel() {
        let m = Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(numerical_rank(&m, 1e-8), 1);
        let k = null_space(&m, 1e-8);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-12);
        assert_eq!(numerical_rank(&Mat::zeros(3, 3), 1e-8), 0);
    }

    #[test]
    fn complex_structure() {
        let j = Mat::from_row_slice(4, 4, &[0., 0., 1., 0., 0., 0., 0., 1., -1., 0., 0., 0., 0., -1., 0., 0.]);
        let b = complex_structure_basis(&j);
        assert_eq!(b.len(), 2);
        let mut cols = Vec::new();
        for e in &b {
            cols.push(e.clone());
            cols.push(&j * e);
        }
        let p = Mat::from_columns(&cols);
        assert!((p.transpose() * &p - Mat::identity(4, 4)).norm() < 1e-12);
        let c = complexify(&j, &j, &b);
        assert!((c - CMat::identity(2, 2) * Complex64::i()).norm() < 1e-12);
    }
}
