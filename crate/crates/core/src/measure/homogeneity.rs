//! Homogeneity of the invariant measures under `phi -> dilate(1/t) phi`.

use serde::{Deserialize, Serialize};

use crate::dual_pair::catalog_pair;
use crate::error::{Error, Result};
use crate::linalg::line_fit;
use crate::measure::fmeasure::{f_degree, f_n_measure};
use crate::measure::mc::MCEstimate;
use crate::measure::orbital::orbital_integral;
use crate::measure::testfn::TestFunction;
use crate::orbit::homogeneity_degree;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureHandle {
    OrbitalIntegral { pair: String, k: usize },
    FMeasure { m: usize, n: usize },
    /// Evaluation at the origin of `R^dim`.
    Dirac { dim: usize },
}

impl MeasureHandle {
    pub fn dim(&self) -> Result<usize> {
        match self {
            MeasureHandle::OrbitalIntegral { pair, .. } => Ok(catalog_pair(pair)?.dim_w()),
            MeasureHandle::FMeasure { m, n } => Ok(2 * m * n),
            MeasureHandle::Dirac { dim } => Ok(*dim),
        }
    }

    pub fn degree(&self) -> Result<i64> {
        match self {
            MeasureHandle::OrbitalIntegral { pair, k } => homogeneity_degree(&catalog_pair(pair)?, *k),
            MeasureHandle::FMeasure { m, n } => Ok(f_degree(*m, *n)),
            MeasureHandle::Dirac { dim } => Ok(-(*dim as i64)),
        }
    }

    pub fn evaluate(&self, phi: &TestFunction, n_samples: usize, seed: u64) -> Result<MCEstimate> {
        match self {
            MeasureHandle::OrbitalIntegral { pair, k } => orbital_integral(&catalog_pair(pair)?, *k, phi, n_samples, seed),
            MeasureHandle::FMeasure { m, n } => f_n_measure(*m, *n, phi, n_samples, seed),
            MeasureHandle::Dirac { dim } => {
                let v = phi.eval(&crate::linalg::Vector::zeros(*dim));
                Ok(MCEstimate::exact(v, 0.0, "point evaluation"))
            }
        }
    }
}

/// `n` points log-spaced on `[a, b]`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub handle: MeasureHandle,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub slope: f64,
    /// Propagated standard error of the slope.
    pub slope_error: f64,
    pub residual: f64,
    pub expected: i64,
}

/// Fits `log mu(dilate(1/t) phi)` against `log t`; the slope is the degree.
/// Each `t` uses its own seed.
pub fn homogeneity_scan(handle: &MeasureHandle, phi: Option<&TestFunction>, ts: &[f64], n_samples: usize, seed: u64) -> Result<HomogeneityReport> {
    if ts.len() < 2 || ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::OutOfRange("need at least two positive dilation parameters".into()));
    }
    let dim = handle.dim()?;
    let default = TestFunction::standard(dim);
    let phi = phi.unwrap_or(&default);
    if phi.dim != dim {
        return Err(Error::Shape(format!("test function on R^{} for a measure on R^{dim}", phi.dim)));
    }
    let est: Vec<MCEstimate> = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| handle.evaluate(&phi.dilate(1.0 / t), n_samples, seed.wrapping_add(i as u64)))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = est.iter().map(|e| e.value).collect();
    if values.iter().any(|v| !(v.abs() > 0.0) || !v.is_finite()) {
        return Err(Error::Singular("measure vanishes on the scan; no logarithm".into()));
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.abs().ln()).collect();
    let (slope, _, residual) = line_fit(&xs, &ys);
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    let var: f64 = xs.iter().zip(&est).map(|(x, e)| ((x - mean) / sxx).powi(2) * (e.std_error / e.value).powi(2)).sum();
    Ok(HomogeneityReport {
        handle: handle.clone(),
        ts: ts.to_vec(),
        std_errors: est.iter().map(|e| e.std_error).collect(),
        values,
        slope,
        slope_error: var.sqrt(),
        residual,
        expected: handle.degree()?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_paths() {
        let ts = log_grid(0.25, 4.0, 5);
        for (h, want) in [
            (MeasureHandle::OrbitalIntegral { pair: "O1_Sp2".into(), k: 1 }, 0.0),
            (MeasureHandle::OrbitalIntegral { pair: "U1_U11".into(), k: 1 }, -2.0),
            (MeasureHandle::FMeasure { m: 1, n: 2 }, -2.0),
            (MeasureHandle::Dirac { dim: 4 }, -4.0),
        ] {
            let r = homogeneity_scan(&h, None, &ts, 0, 1).unwrap();
            assert!((r.slope - want).abs() < 1e-6 && r.expected as f64 == want, "{r:?}");
        }
    }

    #[test]
    fn grid() {
        let g = log_grid(0.25, 4.0, 5);
        assert!((g[2] - 1.0).abs() < 1e-14 && (g[4] - 4.0).abs() < 1e-14);
    }
}
