//! Dilation limits of the intertwining distribution `T(Theta_Pi)` for the
//! compact groups `O_1`, `U_1` and `U_2`, the constant `K` and the degree
//! bookkeeping around them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{herm_skew_dims, Algebra, DMatrix, DScalar};
use crate::dual_pair::{DualPairSpec, PairDescriptor};
use crate::error::{Error, Result};
use crate::linalg::{CMat, Mat};
use crate::measure::fmeasure::richardson3;
use crate::measure::haar::{haar_sample, CompactGroup};
use crate::measure::mc;
use crate::measure::orbital::orbital_integral;
use crate::measure::TestFunction;
use crate::orbit::{homogeneity_degree, orbit_prime_dim_oracle, representative, stratum_dim_formula};
use crate::quad::{gauss_legendre_on, integrate_real_line, QuadOptions};
use crate::slice::{build_slice, g_n_dims};
use crate::weil::{fock_product, hypothesis_holds, kappas_of, torus_element, track_path, CayleyChart, LiftStart};

/// `s_lambda(z) = det(h_{lambda_i - i + j}(z))`, with `det^{lambda_d}` split off
/// when the weight has negative entries.
pub fn schur_jacobi_trudi(lambda: &[i64], z: &[Complex64]) -> Complex64 {
    let d = lambda.len();
    if d == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let shift = lambda[d - 1];
    let mu: Vec<usize> = lambda.iter().map(|l| (l - shift) as usize).collect();
    let top = mu[0] + d;
    // complete homogeneous symmetric polynomials h_0..h_top
    let mut h = vec![Complex64::new(0.0, 0.0); top + 1];
    h[0] = Complex64::new(1.0, 0.0);
    for &zi in z {
        for k in 1..=top {
            let prev = h[k - 1];
            h[k] += zi * prev;
        }
    }
    let m = CMat::from_fn(d, d, |i, j| {
        let idx = mu[i] as i64 - i as i64 + j as i64;
        if idx < 0 {
            Complex64::new(0.0, 0.0)
        } else {
            h[idx as usize]
        }
    });
    let det_z: Complex64 = z.iter().product();
    m.determinant() * det_z.powi(shift as i32)
}

/// Weyl's bialternant `det(z_i^{lambda_j + d - j}) / det(z_i^{d - j})`;
/// `None` when the eigenvalues are too close to divide.
pub fn schur_bialternant(lambda: &[i64], z: &[Complex64]) -> Option<Complex64> {
    let d = lambda.len();
    let num = CMat::from_fn(d, d, |i, j| z[i].powi((lambda[j] + (d - 1 - j) as i64) as i32)).determinant();
    let den = CMat::from_fn(d, d, |i, j| z[i].powi((d - 1 - j) as i32)).determinant();
    (den.norm() > 1e-10).then(|| num / den)
}

/// `prod_{i<j} (lambda_i - lambda_j + j - i) / (j - i)`.
pub fn weyl_dimension(lambda: &[i64]) -> u64 {
    let d = lambda.len();
    let (mut num, mut den) = (1i128, 1i128);
    for i in 0..d {
        for j in i + 1..d {
            num *= (lambda[i] - lambda[j] + (j - i) as i64) as i128;
            den *= (j - i) as i128;
        }
    }
    (num / den) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IrrepGroup {
    O1,
    U(usize),
}

/// An irreducible representation of the double cover of `G`: a highest weight
/// of `G` and whether the kernel of the cover acts by `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactIrrep {
    pub group: IrrepGroup,
    /// `O_1`: `[0]` even, `[1]` odd. `U_d`: non-increasing integers.
    pub weight: Vec<i64>,
    pub genuine: bool,
}

impl CompactIrrep {
    pub fn new(p: &DualPairSpec, weight: Vec<i64>, genuine: bool) -> Result<Self> {
        let group = match (p.alg(), p.d()) {
            (Algebra::R, 1) => IrrepGroup::O1,
            (Algebra::C, d) if d <= 2 => IrrepGroup::U(d),
            _ => return Err(Error::Unsupported(format!("representations of {} are not modelled", p.group_name()))),
        };
        match group {
            IrrepGroup::O1 if weight.len() != 1 || !(0..=1).contains(&weight[0]) => {
                return Err(Error::Config("O1 weight must be 0 (even) or 1 (odd)".into()))
            }
            IrrepGroup::U(d) if weight.len() != d || weight.windows(2).any(|w| w[0] < w[1]) => {
                return Err(Error::Config(format!("U{d} weight must be {d} non-increasing integers")))
            }
            _ => {}
        }
        Ok(CompactIrrep { group, weight, genuine })
    }

    /// `trivial`, `sign`, or comma separated integers, optionally followed by
    /// `:nongenuine`.
    pub fn parse(p: &DualPairSpec, s: &str) -> Result<Self> {
        let (body, genuine) = match s.strip_suffix(":nongenuine") {
            Some(b) => (b, false),
            None => (s, true),
        };
        let weight = match body.trim() {
            "trivial" => vec![0; p.d()],
            "sign" => vec![1],
            other => other
                .split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|_| Error::Config(format!("bad weight entry '{t}'"))))
                .collect::<Result<_>>()?,
        };
        Self::new(p, weight, genuine)
    }

    pub fn label(&self) -> String {
        let w: Vec<String> = self.weight.iter().map(|v| v.to_string()).collect();
        format!("{}{}", w.join(","), if self.genuine { "" } else { ":nongenuine" })
    }

    pub fn dim(&self) -> u64 {
        match self.group {
            IrrepGroup::O1 => 1,
            IrrepGroup::U(_) => weyl_dimension(&self.weight),
        }
    }

    /// Character of the underlying representation of `G` at eigenvalues `z`.
    pub fn character(&self, z: &[Complex64]) -> Complex64 {
        match self.group {
            IrrepGroup::O1 => {
                if self.weight[0] == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    z[0]
                }
            }
            IrrepGroup::U(_) => schur_jacobi_trudi(&self.weight, z),
        }
    }

    pub fn character_at_angles(&self, th: &[f64]) -> Complex64 {
        let z: Vec<Complex64> = th.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        self.character(&z)
    }
}

/// Kashiwara-Vergne type rule for `U_d` in `U(p, q)`: at most `p` positive and
/// `q` negative entries. Every genuine `O_1` representation occurs.
pub fn occurs_in_weil(p: &DualPairSpec, pi: &CompactIrrep) -> Result<bool> {
    if !pi.genuine {
        return Ok(false);
    }
    match pi.group {
        IrrepGroup::O1 => Ok(true),
        IrrepGroup::U(_) => {
            let (pp, qq) = p.signature().ok_or_else(|| Error::Unsupported("not a unitary pair".into()))?;
            if (pp + qq) % 2 == 1 || pp != qq {
                return Err(Error::Unsupported("half-integral weights (p != q) are not modelled".into()));
            }
            let pos = pi.weight.iter().filter(|&&v| v > 0).count();
            let neg = pi.weight.iter().filter(|&&v| v < 0).count();
            Ok(pos <= pp && neg <= qq)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntertwiningValue {
    pub value: Complex64,
    pub error: f64,
}

/// `T(Theta_Pi)(phi) = int_{G~} conj(Theta_Pi(g)) T(g)(phi) dg` with `dg` the
/// Haar probability measure. Over the Cayley image
/// `T(c(x)) = Theta(c(x)) chi_x(w) dw` and `dg` pulls back to
/// `2^{dim g} |det(1 - x)|^{-r} dx`.
#[derive(Clone, Debug)]
pub struct LimitExperiment {
    pub chart: CayleyChart,
    pub pi: CompactIrrep,
    /// `+1` when the Cayley sheet contains the identity, `-1` otherwise.
    pub sheet: f64,
    s_gens: Vec<Mat>,
    c_gens: Vec<CMat>,
    volume: f64,
}

/// Trapezoid step of the rank-2 rule; the error estimate compares with `2h`.
pub const SINH_STEP: f64 = 0.2;

fn weyl_constant(d: usize) -> f64 {
    match d {
        1 => 1.0,
        _ => 2.0 * PI,
    }
}

impl LimitExperiment {
    pub fn new(p: &DualPairSpec, pi: CompactIrrep) -> Result<Self> {
        let chart = CayleyChart::new(p);
        let fresh = CompactIrrep::new(p, pi.weight.clone(), pi.genuine)?;
        if fresh.group != pi.group {
            return Err(Error::Config("representation does not match the pair".into()));
        }
        let mut exp = LimitExperiment { chart, pi, sheet: 1.0, s_gens: Vec::new(), c_gens: Vec::new(), volume: 1.0 };
        if let IrrepGroup::U(d) = exp.pi.group {
            if p.signature().map_or(true, |(a, b)| a != b) {
                return Err(Error::Unsupported("U_d experiments need a split hermitian form".into()));
            }
            let gens: Vec<DMatrix> = (0..d).map(|k| DMatrix::elementary(Algebra::C, d, d, k, k, DScalar::complex(0.0, 1.0))).collect();
            exp.s_gens = gens.iter().map(|x| exp.chart.quad_form(x)).collect::<Result<_>>()?;
            exp.c_gens = gens.iter().map(|x| exp.chart.x_operator(x)).collect::<Result<_>>()?;
            // Sheet of c(0) = -1 relative to the identity, via the torus path.
            let path: Vec<DMatrix> = (0..=64).map(|i| torus_element(p, &vec![PI * i as f64 / 64.0; d])).collect::<Result<_>>()?;
            let tracked = track_path(&exp.chart, &path, LiftStart::Identity)?;
            let id_sheet = fock_product(tracked.angles.last().expect("non-empty"));
            let cayley = fock_product(&vec![PI; exp.chart.n_lines()]);
            exp.sheet = (id_sheet / cayley).re.signum();
            // the density is a trigonometric polynomial in v, so this is exact
            exp.volume = exp.torus_fixed(&|th: &[f64]| Complex64::new(exp.haar_density(th), 0.0), 1.0, 32).re;
        }
        Ok(exp)
    }

    fn rank(&self) -> usize {
        match self.pi.group {
            IrrepGroup::O1 => 0,
            IrrepGroup::U(d) => d,
        }
    }

    /// `pi_Pi(z)` for the non-trivial element `z` of the kernel of the cover.
    fn kernel_sign(&self) -> f64 {
        if self.pi.genuine {
            -1.0
        } else {
            1.0
        }
    }

    /// `Theta_Pi(c(x))` on the Cayley sheet at torus coordinates `theta`.
    pub fn theta_pi_cayley(&self, theta: &[f64]) -> Complex64 {
        match self.pi.group {
            IrrepGroup::O1 => {
                let base = if self.pi.weight[0] == 0 { 1.0 } else { -1.0 };
                if self.pi.genuine {
                    Complex64::new(0.0, base)
                } else {
                    Complex64::new(base, 0.0)
                }
            }
            IrrepGroup::U(_) => {
                // eigenvalues of c(i theta) are -e^{2 i arctan theta}
                let beta: Vec<f64> = theta.iter().map(|t| PI + 2.0 * t.atan()).collect();
                let ch = self.pi.character_at_angles(&beta);
                if self.pi.genuine && self.sheet < 0.0 {
                    -ch
                } else {
                    ch
                }
            }
        }
    }

    /// Pullback of Haar measure to the torus of `g`: Cayley Jacobian times the
    /// Weyl integration factor.
    fn haar_density(&self, theta: &[f64]) -> f64 {
        let d = theta.len();
        let det: f64 = theta.iter().map(|t| 1.0 + t * t).product();
        let jac = 2f64.powi(self.chart.spec.dim_g() as i32) * det.powf(-self.chart.r);
        let mut vdm = 1.0;
        for i in 0..d {
            for j in i + 1..d {
                vdm *= (theta[i] - theta[j]).powi(2);
            }
        }
        jac * weyl_constant(d) * 2f64.powf(d as f64 / 2.0) * vdm
    }

    /// `conj(Theta_Pi) Theta` times the Haar density, without the pairing.
    fn weight(&self, theta: &[f64]) -> Complex64 {
        let n = self.chart.n_lines();
        let c: CMat = self.c_gens.iter().zip(theta).fold(CMat::zeros(n, n), |acc, (g, t)| acc + g * Complex64::new(*t, 0.0));
        let mu: Vec<f64> = kappas_of(&c).into_iter().map(|k| PI - 2.0 * k.atan()).collect();
        self.theta_pi_cayley(theta).conj() * fock_product(&mu) * self.haar_density(theta)
    }

    /// Tensor Gauss-Legendre rule in `theta = w tan(v)`.
    fn torus_fixed(&self, f: &impl Fn(&[f64]) -> Complex64, w: f64, nodes: usize) -> Complex64 {
        let (v, wv) = gauss_legendre_on(nodes, -PI / 2.0, PI / 2.0);
        let pts: Vec<(f64, f64)> = v.iter().zip(&wv).map(|(a, wa)| (w * a.tan(), wa * w / a.cos().powi(2))).collect();
        self.tensor_sum(f, &pts)
    }

    /// Trapezoid rule with step `h` in `theta = w sinh(u)` out to
    /// `|theta| = 1e8`, resolving every scale in between; the integrand only
    /// decays like `theta^-2`. Returns the values for steps `h` and `2h` (the
    /// even subgrid). Rank 2 sums over `theta_1 >= theta_2` only, the integrand
    /// being symmetric for invariant test functions.
    fn torus_sinh(&self, f: &impl Fn(&[f64]) -> Complex64, w: f64, h: f64) -> (Complex64, Complex64) {
        let n = ((2e8 / w).ln() / (2.0 * h)).ceil() as i64 * 2;
        let pts: Vec<(f64, f64, bool)> = (-n..=n)
            .map(|k| {
                let u = k as f64 * h;
                (w * u.sinh(), h * w * u.cosh(), k % 2 == 0)
            })
            .collect();
        let zero = Complex64::new(0.0, 0.0);
        let (mut fine, mut coarse) = (zero, zero);
        if self.rank() == 1 {
            for &(a, wa, even) in &pts {
                let v = f(&[a]) * wa;
                fine += v;
                if even {
                    coarse += v * 2.0;
                }
            }
            return (fine, coarse);
        }
        for (i, &(a, wa, ea)) in pts.iter().enumerate() {
            for &(b, wb, eb) in &pts[..i] {
                let v = f(&[a, b]) * (2.0 * wa * wb);
                fine += v;
                if ea && eb {
                    coarse += v * 4.0;
                }
            }
            let v = f(&[a, a]) * (wa * wa);
            fine += v;
            if ea {
                coarse += v * 4.0;
            }
        }
        (fine, coarse)
    }

    fn tensor_sum(&self, f: &impl Fn(&[f64]) -> Complex64, pts: &[(f64, f64)]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        match self.rank() {
            1 => {
                for &(a, wa) in pts {
                    acc += f(&[a]) * wa;
                }
            }
            _ => {
                for &(a, wa) in pts {
                    for &(b, wb) in pts {
                        acc += f(&[a, b]) * (wa * wb);
                    }
                }
            }
        }
        acc
    }

    fn s_at(&self, theta: &[f64]) -> Mat {
        self.s_gens.iter().zip(theta).fold(Mat::zeros(self.chart.spec.dim_w(), self.chart.spec.dim_w()), |acc, (s, t)| acc + s * *t)
    }

    /// Adaptive quadrature over the torus of `g` in coordinates scaled by `w`.
    fn torus_integral_scaled(&self, f: impl Fn(&[f64]) -> Complex64, w: f64, rel: f64) -> Result<IntertwiningValue> {
        let opts = QuadOptions { abs_tol: 1e-300, rel_tol: rel, max_intervals: 4000 };
        match self.rank() {
            1 => {
                let r = integrate_real_line(|u: f64| f(&[w * u]) * w, opts)?;
                Ok(IntertwiningValue { value: r.value, error: r.error })
            }
            2 => {
                // two tensor rules, their gap as the error
                let (fine, coarse) = self.torus_sinh(&f, w, SINH_STEP);
                if !(fine.re.is_finite() && fine.im.is_finite()) {
                    return Err(Error::Quadrature("non-finite torus integral".into()));
                }
                Ok(IntertwiningValue { value: fine, error: (fine - coarse).norm() })
            }
            _ => Err(Error::Unsupported("torus of rank > 2".into())),
        }
    }

    /// Width in `theta` over which `int chi_x phi` decays, capped by the
    /// scale on which the Haar density varies.
    fn pairing_width(&self, phi: &TestFunction) -> f64 {
        let s_norm = self.s_gens.iter().map(|s| s.amax()).fold(0.0, f64::max).max(1e-300);
        (phi.min_precision() / s_norm).min(0.5)
    }

    fn check_phi(&self, phi: &TestFunction) -> Result<()> {
        if phi.dim != self.chart.spec.dim_w() {
            return Err(Error::Shape(format!("test function on R^{} but dim W = {}", phi.dim, self.chart.spec.dim_w())));
        }
        Ok(())
    }

    fn value_with(&self, phi: &TestFunction, pairing: impl Fn(&Mat) -> Complex64) -> Result<IntertwiningValue> {
        self.check_phi(phi)?;
        // Sheets of the cover: the Cayley sheet contributes I, the other
        // -pi(z) I since T is genuine.
        let sheets = 1.0 - self.kernel_sign();
        match self.pi.group {
            IrrepGroup::O1 => {
                // G~ has four elements; mass 1/4 each.
                let zero = crate::linalg::Vector::zeros(phi.dim);
                let theta0 = fock_product(&vec![PI; self.chart.n_lines()]);
                let id = phi.eval(&zero);
                let cay = self.theta_pi_cayley(&[]).conj() * theta0 * pairing(&Mat::zeros(phi.dim, phi.dim));
                Ok(IntertwiningValue { value: (Complex64::new(id, 0.0) + cay) * (sheets / 4.0), error: 0.0 })
            }
            IrrepGroup::U(_) => {
                if sheets == 0.0 {
                    return Ok(IntertwiningValue { value: Complex64::new(0.0, 0.0), error: 0.0 });
                }
                let w = self.pairing_width(phi);
                let v = self.torus_integral_scaled(|th| self.weight(th) * pairing(&self.s_at(th)), w, 1e-9)?;
                let norm = sheets / (2.0 * self.volume);
                Ok(IntertwiningValue { value: v.value * norm, error: v.error * norm })
            }
        }
    }

    pub fn intertwining_value(&self, phi: &TestFunction) -> Result<IntertwiningValue> {
        self.value_with(phi, |s| phi.pairing(s))
    }

    /// The same value for `dilate(t) phi`, computed by rescaling the pairing:
    /// `int chi_x dilate(t) phi = int chi_{x / t^2} phi`.
    pub fn intertwining_value_rescaled(&self, phi: &TestFunction, t: f64) -> Result<IntertwiningValue> {
        self.check_phi(phi)?;
        let dil = phi.dilate(t);
        let base = self.value_with(&dil, |s| phi.pairing(&(s / (t * t))))?;
        Ok(base)
    }

    /// Value from the trapezoid rule in `theta = w sinh(u)` with step `h`,
    /// for step-halving checks.
    pub fn intertwining_value_with_step(&self, phi: &TestFunction, h: f64) -> Result<Complex64> {
        self.check_phi(phi)?;
        if let IrrepGroup::O1 = self.pi.group {
            return Ok(self.intertwining_value(phi)?.value);
        }
        if !(h > 0.0) {
            return Err(Error::OutOfRange("quadrature step must be positive".into()));
        }
        let sheets = 1.0 - self.kernel_sign();
        let w = self.pairing_width(phi);
        let (acc, _) = self.torus_sinh(&|th: &[f64]| self.weight(th) * phi.pairing(&self.s_at(th)), w, h);
        Ok(acc * (sheets / (2.0 * self.volume)))
    }
}

/// Five positive `G`-invariant Gaussian x polynomial test functions on `W`,
/// built from left multiplications on the `d'` side.
pub fn limit_family(p: &DualPairSpec) -> Vec<(String, TestFunction)> {
    let dp = p.d_prime();
    let alg = p.alg();
    let left = |a: &Mat| {
        let am = DMatrix::from_real(alg, a);
        p.w_operator(|w| &am * w)
    };
    let sym = |diag: &[f64], off: f64| Mat::from_fn(dp, dp, |i, j| if i == j { diag[i % diag.len()] } else if i + 1 == j || j + 1 == i { off } else { 0.0 });
    let a2 = sym(&[1.4, 0.8], 0.3);
    let a3 = sym(&[0.6, 1.1], -0.15);
    let a4 = sym(&[0.9, 1.7], 0.2);
    let n = p.dim_w();
    let zeros = crate::linalg::Vector::zeros(n);
    let id = Mat::identity(n, n);
    let std = TestFunction::standard(n);
    let sq: Vec<(f64, Vec<usize>)> = (0..n).map(|i| (1.0, vec![i, i])).collect();
    let mut f3 = sq.clone();
    f3.push((0.5, vec![]));
    let root = {
        let e = crate::linalg::sym_eigen(a3.clone());
        &e.eigenvectors * Mat::from_diagonal(&e.eigenvalues.map(f64::sqrt)) * e.eigenvectors.transpose()
    };
    let mut f4 = sq.clone();
    f4.push((0.2, vec![]));
    vec![
        ("gauss".to_string(), std.clone()),
        ("gauss_aniso".to_string(), TestFunction::gaussian(left(&a2), zeros.clone()).expect("positive")),
        ("gauss_norm2".to_string(), std.with_polynomial(&id, &zeros, &f3).expect("valid")),
        (
            "aniso_form".to_string(),
            TestFunction::gaussian(left(&a4), zeros.clone()).expect("positive").with_polynomial(&left(&root), &zeros, &f4).expect("valid"),
        ),
        (
            "two_gauss".to_string(),
            std.scale(0.3).add(&TestFunction::gaussian(left(&a3), zeros.clone()).expect("positive").scale(0.7)).expect("same dim"),
        ),
    ]
}

fn richardson_c(f: [Complex64; 3]) -> Complex64 {
    let re = richardson3([f[0].re, f[1].re, f[2].re], 2.0).0;
    let im = richardson3([f[0].im, f[1].im, f[2].im], 2.0).0;
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiScan {
    pub name: String,
    pub scaled: Vec<Complex64>,
    pub extrapolants: Vec<Complex64>,
    pub limit: Complex64,
    /// `|E_last - E_prev| / |E_last|` of the last two extrapolants.
    pub extrapolation_drift: f64,
    pub mu: f64,
    pub ratio: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub pair: String,
    pub weight: String,
    pub occurs: bool,
    pub degree: i64,
    pub ts: Vec<f64>,
    pub phis: Vec<PhiScan>,
    /// Scaled identity contribution `t^{deg + dim W} phi(0)` for the first test
    /// function (`O_1` only).
    pub identity_term: Option<Vec<f64>>,
    pub ratio_mean: Complex64,
    /// `max_i |ratio_i - mean| / |mean|`.
    pub ratio_spread: f64,
    /// Largest `|limit|` over the family.
    pub max_abs_limit: f64,
    pub converged: bool,
}

/// `t_k = t0 2^{-k}`.
pub fn halving_grid(t0: f64, t_min: f64) -> Vec<f64> {
    let mut out = vec![t0];
    while *out.last().expect("non-empty") / 2.0 >= t_min * 0.999 {
        out.push(out.last().expect("non-empty") / 2.0);
    }
    out
}

pub fn dilation_scan(exp: &LimitExperiment, phis: &[(String, TestFunction)], ts: &[f64], tol: f64, n_samples: usize, seed: u64) -> Result<LimitReport> {
    let p = &exp.chart.spec;
    if ts.len() < 4 || ts.windows(2).any(|w| (w[0] / w[1] - 2.0).abs() > 1e-9) {
        return Err(Error::Config("dilation grid must halve at each step and have at least 4 points".into()));
    }
    let m = p.m();
    let degree = homogeneity_degree(p, m)?;
    let mut scans = Vec::new();
    for (i, (name, phi)) in phis.iter().enumerate() {
        let scaled: Vec<Complex64> = ts
            .iter()
            .map(|&t| Ok(exp.intertwining_value(&phi.dilate(t))?.value * t.powi(degree as i32)))
            .collect::<Result<_>>()?;
        let extrapolants: Vec<Complex64> = (2..scaled.len()).map(|k| richardson_c([scaled[k - 2], scaled[k - 1], scaled[k]])).collect();
        let limit = *extrapolants.last().expect("at least 4 points");
        let prev = extrapolants[extrapolants.len() - 2];
        let drift = if limit.norm() > 0.0 { (limit - prev).norm() / limit.norm() } else { (limit - prev).norm() };
        let mu = orbital_integral(p, m, phi, n_samples, seed.wrapping_add(i as u64))?.value;
        scans.push(PhiScan { name: name.clone(), scaled, extrapolants, limit, extrapolation_drift: drift, mu, ratio: limit / mu });
    }
    let n = scans.len() as f64;
    let ratio_mean = scans.iter().map(|s| s.ratio).sum::<Complex64>() / n;
    let ratio_spread = scans.iter().map(|s| (s.ratio - ratio_mean).norm()).fold(0.0, f64::max) / ratio_mean.norm();
    let identity_term = matches!(exp.pi.group, IrrepGroup::O1).then(|| {
        let zero = crate::linalg::Vector::zeros(p.dim_w());
        ts.iter().map(|t| t.powi(p.dim_w() as i32 + degree as i32) * phis[0].1.eval(&zero)).collect()
    });
    Ok(LimitReport {
        pair: p.name().to_string(),
        weight: exp.pi.label(),
        occurs: occurs_in_weil(p, &exp.pi)?,
        degree,
        ts: ts.to_vec(),
        max_abs_limit: scans.iter().map(|s| s.limit.norm()).fold(0.0, f64::max),
        converged: scans.iter().all(|s| s.extrapolation_drift <= tol),
        phis: scans,
        identity_term,
        ratio_mean,
        ratio_spread,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KReport {
    pub pair: String,
    pub weight: String,
    pub dim_pi: u64,
    pub occurs: bool,
    /// `2^{3/2 dim g_N^perp - 1/2 dim SH_m}`.
    pub c_constant: f64,
    pub prefactor: f64,
    /// Scalar by which `c(0)` acts in `Pi (x) chi_+^{-1}`.
    pub central: Complex64,
    pub multiplicity_estimate: f64,
    pub multiplicity_error: f64,
    pub multiplicity: i64,
    pub residual: f64,
    pub k: Complex64,
}

/// `chi_+ = Theta / |Theta|` on the identity sheet, the product over the
/// lines where `g` acts non-trivially.
pub fn chi_plus_identity_sheet(chart: &CayleyChart, g: &DMatrix) -> Result<Complex64> {
    let mut z = Complex64::new(1.0, 0.0);
    for a in chart.w_angles(g)? {
        if a.abs() > 1e-9 {
            z *= Complex64::new(0.0, (a / 2.0).sin().signum());
        }
    }
    Ok(z)
}

fn complex_eigenvalues(g: &DMatrix) -> Vec<Complex64> {
    let n = g.rows();
    let c = CMat::from_fn(n, n, |i, j| {
        let x = g.get(i, j);
        Complex64::new(x.coords(Algebra::C)[0], x.coords(Algebra::C)[1])
    });
    let (_, t) = c.schur().unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

pub fn k_constant(p: &DualPairSpec, pi: &CompactIrrep, n_samples: usize, seed: u64) -> Result<KReport> {
    if !hypothesis_holds(p) {
        return Err(Error::Unsupported(format!("{}: needs d = m or a split form", p.name())));
    }
    let exp = LimitExperiment::new(p, pi.clone())?;
    let m = p.m();
    let chart = build_slice(p, m)?;
    let (_, perp) = g_n_dims(&chart);
    let (_, sh) = herm_skew_dims(p.alg(), m);
    let c_constant = 2f64.powf(1.5 * perp as f64 - 0.5 * sh as f64);
    let prefactor = 2f64.powf(1.0 + p.dim_w() as f64 / 2.0);
    let dim_pi = pi.dim();
    let theta0 = match pi.group {
        IrrepGroup::O1 => exp.theta_pi_cayley(&[]),
        IrrepGroup::U(d) => exp.theta_pi_cayley(&vec![0.0; d]),
    };
    let chi0 = Complex64::new(0.0, 1.0).powu((p.dim_w() / 2) as u32);
    let central = theta0 / dim_pi as f64 * chi0.conj();
    let est = if p.d() == m {
        mc::MCEstimate::exact(dim_pi as f64, 0.0, "trivial stabilizer")
    } else {
        let d = p.d();
        let wchart = CayleyChart::new(p);
        mc::run(n_samples, seed, |rng| {
            let h = haar_sample(CompactGroup::U(d - m), rng);
            let mut g = DMatrix::identity(Algebra::C, d);
            g.set_block(m, m, &h);
            let ev = complex_eigenvalues(&g);
            let ch = pi.character(&ev);
            let chi = chi_plus_identity_sheet(&wchart, &g).expect("invertible");
            (ch * chi.conj()).re
        })
    };
    let multiplicity = est.value.round() as i64;
    Ok(KReport {
        pair: p.name().to_string(),
        weight: pi.label(),
        dim_pi,
        occurs: occurs_in_weil(p, pi)?,
        c_constant,
        prefactor,
        central,
        multiplicity_estimate: est.value,
        multiplicity_error: est.std_error,
        multiplicity,
        residual: est.value - multiplicity as f64,
        k: central * (c_constant * prefactor * multiplicity as f64),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecursion {
    pub d: usize,
    pub l_prime: usize,
    pub degree: i64,
    pub degree_reduced: i64,
    pub delta_dim_w: i64,
    /// `degree_reduced - delta_dim_w`.
    pub bound: i64,
    pub equality: bool,
    /// Equality is expected exactly when `d > l'`.
    pub expected_equality: bool,
    pub holds: bool,
}

/// Compares `deg mu` for `(O_d, Sp_{2l'})` with its reduction `(O_{d-1}, Sp_{2l'})`.
pub fn degree_recursion_check(d: usize, l_prime: usize) -> Result<DegreeRecursion> {
    if d < 2 || l_prime < 1 {
        return Err(Error::OutOfRange("need d >= 2 and l' >= 1".into()));
    }
    let spec = |d| DualPairSpec::new(PairDescriptor { algebra: Algebra::R, d, d_prime: 2 * l_prime, witt: l_prime });
    let (big, small) = (spec(d)?, spec(d - 1)?);
    let degree = homogeneity_degree(&big, big.m())?;
    let degree_reduced = homogeneity_degree(&small, small.m())?;
    let delta = big.dim_w() as i64 - small.dim_w() as i64;
    let bound = degree_reduced - delta;
    let equality = degree == bound;
    let expected_equality = d > l_prime;
    Ok(DegreeRecursion {
        d,
        l_prime,
        degree,
        degree_reduced,
        delta_dim_w: delta,
        bound,
        equality,
        expected_equality,
        holds: degree >= bound && equality == expected_equality,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavefrontReport {
    pub pair: String,
    pub dims: Vec<usize>,
    pub oracle_dims: Vec<usize>,
    /// Largest entry of `tau'(w_k)^2` over the chain.
    pub nilpotency_residual: f64,
}

/// The chain `O'_0 < O'_1 < ... < O'_m` with dimensions and representatives `tau'(w_k)`.
pub fn wavefront_report(p: &DualPairSpec) -> Result<WavefrontReport> {
    let mut dims = Vec::new();
    let mut oracle = Vec::new();
    let mut resid: f64 = 0.0;
    for k in 0..=p.m() {
        let w = representative(p, k)?;
        dims.push(stratum_dim_formula(p, k)?.dim_ok_prime);
        oracle.push(orbit_prime_dim_oracle(p, &w)?);
        let t = p.moment_tau_prime(&w)?;
        resid = resid.max((&t * &t).max_abs());
    }
    Ok(WavefrontReport { pair: p.name().to_string(), dims, oracle_dims: oracle, nilpotency_residual: resid })
}
