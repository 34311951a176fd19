//! Deterministic quadrature: adaptive Gauss-Kronrod (21 points), Gauss-Legendre
//! and Gauss-Hermite rules.

use std::collections::BinaryHeap;

use nalgebra as na;
use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077715761396730,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Values that can be integrated: real or complex.
pub trait QuadValue: Copy + Send + Sync + std::ops::Add<Output = Self> + std::ops::Sub<Output = Self> {
    fn zero() -> Self;
    fn scale(self, s: f64) -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 2000 }
    }
}

fn gk21<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc.scale(WGK[10]);
    let mut g = T::zero();
    for i in 0..10 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k = k + s.scale(WGK[i]);
        if i % 2 == 1 {
            g = g + s.scale(WG[i / 2]);
        }
    }
    let k = k.scale(h);
    let g = g.scale(h);
    (k, (k - g).magnitude())
}

struct Piece<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Piece<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Piece<T> {}
impl<T> PartialOrd for Piece<T> {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Piece<T> {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss-Kronrod integration over a finite interval.
pub fn integrate<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<T>> {
    let (v, e) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, err: e });
    let mut total = v;
    let mut err = e;
    let mut evals = 21;
    while err > opts.abs_tol.max(opts.rel_tol * total.magnitude()) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {err:.3e} after {} intervals on [{a}, {b}]",
                heap.len()
            )));
        }
        let p = heap.pop().expect("nonempty");
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gk21(&f, p.a, mid);
        let (v2, e2) = gk21(&f, mid, p.b);
        evals += 42;
        total = total - p.value + v1 + v2;
        err = err - p.err + e1 + e2;
        heap.push(Piece { a: p.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: p.b, value: v2, err: e2 });
        // Recompute from scratch now and then to stop drift in the running sums.
        if heap.len() % 64 == 0 {
            total = heap.iter().fold(T::zero(), |s, p| s + p.value);
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    Ok(QuadResult { value: total, error: err, evaluations: evals })
}

/// Integral over the whole real line via `x = tan u`.
pub fn integrate_real_line<T: QuadValue>(f: impl Fn(f64) -> T, opts: QuadOptions) -> Result<QuadResult<T>> {
    let g = |u: f64| {
        let c = u.cos();
        f(u.tan()).scale(1.0 / (c * c))
    };
    let h = std::f64::consts::FRAC_PI_2;
    integrate(g, -h, h, opts)
}

/// Integral over `[a, inf)` via `x = a + s/(1-s)`.
pub fn integrate_half_line<T: QuadValue>(f: impl Fn(f64) -> T, a: f64, opts: QuadOptions) -> Result<QuadResult<T>> {
    let g = |s: f64| {
        let d = 1.0 - s;
        f(a + s / d).scale(1.0 / (d * d))
    };
    integrate(g, 0.0, 1.0, opts)
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    (x.iter().map(|t| a + h * (t + 1.0)).collect(), w.iter().map(|v| v * h).collect())
}

/// `n`-point Gauss-Hermite rule for the weight `exp(-x^2)` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = na::DMatrix::from_fn(n, n, |r, c| {
        if r + 1 == c || c + 1 == r {
            (r.max(c) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = crate::linalg::sym_eigen(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
