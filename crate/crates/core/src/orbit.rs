//! Rank strata `O_k` of the null fiber `tau^{-1}(0)` and their images `O'_k`.

use serde::{Deserialize, Serialize};

use crate::algebra::{herm_skew_dims, DMatrix, DScalar};
use crate::dual_pair::DualPairSpec;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_CUTOFF: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct OrbitStratum {
    pub k: usize,
    pub rep: DMatrix,
    pub dim_ok: usize,
    pub dim_ok_prime: usize,
    pub degree: i64,
    pub dim_ok_oracle: usize,
}

/// Both readings of the stratum dimension formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumDims {
    /// `dim D ((d'-k)k + (d-k)k) + dim H_k`.
    pub dim_ok: usize,
    /// The printed variant with `(d-k)d` in place of `(d-k)k`.
    pub dim_ok_literal: usize,
    pub dim_ok_prime: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasRow {
    pub pair: String,
    pub k: usize,
    #[serde(rename = "dim_Ok")]
    pub dim_ok: usize,
    #[serde(rename = "dim_Ok_literal")]
    pub dim_ok_literal: usize,
    #[serde(rename = "dim_Ok_prime")]
    pub dim_ok_prime: usize,
    pub degree: i64,
    pub oracle_dim: usize,
    pub oracle_dim_prime: usize,
    pub agree: bool,
}

fn check_k(p: &DualPairSpec, k: usize) -> Result<()> {
    if k > p.m() {
        return Err(Error::OutOfRange(format!("k = {k} exceeds m = {} for {}", p.m(), p.name())));
    }
    Ok(())
}

/// `w_k = [[I_k, 0], [0, 0], [0, 0]]`.
pub fn representative(p: &DualPairSpec, k: usize) -> Result<DMatrix> {
    check_k(p, k)?;
    let mut w = p.zero_w();
    for i in 0..k {
        w.set(i, i, DScalar::ONE);
    }
    Ok(w)
}

pub fn stratum_dim_formula(p: &DualPairSpec, k: usize) -> Result<StratumDims> {
    check_k(p, k)?;
    let n = p.alg().dim();
    let (d, dp) = (p.d(), p.d_prime());
    let (h, sh) = herm_skew_dims(p.alg(), k);
    Ok(StratumDims {
        dim_ok: n * ((dp - k) * k + (d - k) * k) + h,
        dim_ok_literal: n * ((dp - k) * k + (d - k) * d) + h,
        dim_ok_prime: dp * k * n - 2 * sh,
    })
}

/// Real matrix of `(x, x') -> x' w - w x` on `g + g'`, columns in
/// B-orthonormal coordinates of `W`.
pub fn tangent_matrix(p: &DualPairSpec, w: &DMatrix) -> Mat {
    let mut cols = Vec::new();
    for x in p.g_basis().vectors {
        cols.push(linalg::Vector::from_vec(p.coords(&-&(w * &x))));
    }
    for xp in p.g_prime_basis().vectors {
        cols.push(linalg::Vector::from_vec(p.coords(&(&xp * w))));
    }
    Mat::from_columns(&cols)
}

/// Dimension of the `G x G'` orbit through `w` (numerical tangent rank).
pub fn orbit_dim_oracle(p: &DualPairSpec, w: &DMatrix) -> usize {
    linalg::numerical_rank(&tangent_matrix(p, w), RANK_CUTOFF)
}

/// Dimension of the adjoint `G'` orbit through `tau'(w)`.
pub fn orbit_prime_dim_oracle(p: &DualPairSpec, w: &DMatrix) -> Result<usize> {
    let t = p.moment_tau_prime(w)?;
    let cols: Vec<linalg::Vector> = p
        .g_prime_basis()
        .vectors
        .iter()
        .map(|xp| linalg::Vector::from_vec((&(xp * &t) - &(&t * xp)).to_real_vec()))
        .collect();
    Ok(linalg::numerical_rank(&Mat::from_columns(&cols), RANK_CUTOFF))
}

/// `deg mu_{O_k} = dim O'_k - dim W`.
pub fn homogeneity_degree(p: &DualPairSpec, k: usize) -> Result<i64> {
    let dims = stratum_dim_formula(p, k)?;
    Ok(dims.dim_ok_prime as i64 - p.dim_w() as i64)
}

/// Elements of `O_k` converging to `w_{k-1}`: the last unit of `w_k` scaled by each `t`.
pub fn closure_witness(p: &DualPairSpec, k: usize, ts: &[f64]) -> Result<Vec<DMatrix>> {
    check_k(p, k)?;
    if k == 0 {
        return Err(Error::OutOfRange("closure witness needs k >= 1".into()));
    }
    let base = representative(p, k)?;
    Ok(ts
        .iter()
        .map(|&t| {
            let mut w = base.clone();
            w.set(k - 1, k - 1, DScalar::real(t));
            w
        })
        .collect())
}

pub fn stratum(p: &DualPairSpec, k: usize) -> Result<OrbitStratum> {
    let rep = representative(p, k)?;
    let dims = stratum_dim_formula(p, k)?;
    Ok(OrbitStratum {
        k,
        dim_ok_oracle: orbit_dim_oracle(p, &rep),
        rep,
        dim_ok: dims.dim_ok,
        dim_ok_prime: dims.dim_ok_prime,
        degree: homogeneity_degree(p, k)?,
    })
}

/// One atlas row per `k = 0..=m`.
pub fn atlas(p: &DualPairSpec) -> Result<Vec<AtlasRow>> {
    (0..=p.m())
        .map(|k| {
            let rep = representative(p, k)?;
            let dims = stratum_dim_formula(p, k)?;
            let oracle = orbit_dim_oracle(p, &rep);
            let oracle_prime = orbit_prime_dim_oracle(p, &rep)?;
            Ok(AtlasRow {
                pair: p.name().to_string(),
                k,
                dim_ok: dims.dim_ok,
                dim_ok_literal: dims.dim_ok_literal,
                dim_ok_prime: dims.dim_ok_prime,
                degree: homogeneity_degree(p, k)?,
                oracle_dim: oracle,
                oracle_dim_prime: oracle_prime,
                agree: oracle == dims.dim_ok && oracle_prime == dims.dim_ok_prime,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual_pair::catalog_pair;

    #[test]
    fn o3_sp4() {
        let p = catalog_pair("O3_Sp4").unwrap();
        let d = stratum_dim_formula(&p, 2).unwrap();
        assert_eq!((d.dim_ok, d.dim_ok_prime), (9, 6));
        assert_eq!(homogeneity_degree(&p, 2).unwrap(), -6);
        let w2 = representative(&p, 2).unwrap();
        assert_eq!(orbit_dim_oracle(&p, &w2), 9);
        assert_eq!(p.moment_tau(&w2).unwrap().max_abs(), 0.0);
        assert_eq!(stratum_dim_formula(&p, 1).unwrap().dim_ok_literal, 10);
        assert!(representative(&p, 3).is_err());
    }

    #[test]
    fn small_pairs() {
        let p = catalog_pair("U2_U11").unwrap();
        let d = stratum_dim_formula(&p, 1).unwrap();
        assert_eq!((d.dim_ok, d.dim_ok_prime), (5, 2));
        let u = catalog_pair("U1_U11").unwrap();
        assert_eq!(homogeneity_degree(&u, 1).unwrap(), -2);
        let o = catalog_pair("O1_Sp2").unwrap();
        assert_eq!(homogeneity_degree(&o, 1).unwrap(), 0);
        let w = o.from_coords(&[0.3, -1.2]);
        assert_eq!(orbit_dim_oracle(&o, &w), 2);
        assert_eq!(orbit_dim_oracle(&o, &o.zero_w()), 0);
    }

    #[test]
    fn closure() {
        let p = catalog_pair("O3_Sp4").unwrap();
        let seq = closure_witness(&p, 2, &[1.0, 1e-3, 1e-6]).unwrap();
        let target = representative(&p, 1).unwrap();
        assert!((&seq[2] - &target).norm() <= 1e-6);
        for w in &seq {
            assert_eq!(w.real_rank(RANK_CUTOFF), 2);
            assert_eq!(orbit_dim_oracle(&p, w), 9);
        }
    }
}
