//! Haar sampling, Gaussian test functions, the Monte-Carlo engine and the
//! invariant measures built on them.

pub mod fmeasure;
pub mod haar;
pub mod homogeneity;
pub mod mc;
pub mod orbital;
pub mod testfn;

pub use haar::{haar_sample, CompactGroup, KPrimeSampler};
pub use mc::MCEstimate;
pub use testfn::{GaussPoly, TestFunction};

/// Area of the unit sphere `S^n` in `R^{n+1}`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf((n as f64 + 1.0) / 2.0) / gamma_half(n + 1)
}

/// `Gamma(k / 2)` for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0, "Gamma has a pole at 0");
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spheres() {
        assert!((sphere_area(0) - 2.0).abs() < 1e-14);
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        // |S^{2l}| = 2 4^l l! / (2l)! pi^l
        for l in 1..6u32 {
            let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
            let want = 2.0 * 4f64.powi(l as i32) * fact(l) / fact(2 * l) * PI.powi(l as i32);
            assert!((sphere_area(2 * l as usize) - want).abs() < 1e-12 * want);
        }
    }
}
