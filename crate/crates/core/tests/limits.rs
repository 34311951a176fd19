//! Frozen values of the dilation-limit experiments.

use std::f64::consts::PI;

use orbitlab_core::catalog_pair;
use orbitlab_core::limit::{dilation_scan, halving_grid, k_constant, limit_family, CompactIrrep, LimitExperiment};

#[test]
fn o1_sp2_limit_constant_is_pi_over_four() {
    // Theta(c(0)) = i/2 and mu = Lebesgue / pi, so limit / mu = (1/2)(1/2) pi.
    let p = catalog_pair("O1_Sp2").unwrap();
    let exp = LimitExperiment::new(&p, CompactIrrep::parse(&p, "trivial").unwrap()).unwrap();
    let r = dilation_scan(&exp, &limit_family(&p), &halving_grid(0.1, 1e-3), 0.02, 0, 1).unwrap();
    assert!(r.converged && r.ratio_spread < 1e-10);
    assert!((r.ratio_mean.re - PI / 4.0).abs() < 1e-10 && r.ratio_mean.im.abs() < 1e-12, "{:?}", r.ratio_mean);
}

#[test]
fn u1_u11_limit_ratio_alternates_with_weight() {
    let p = catalog_pair("U1_U11").unwrap();
    let fam: Vec<_> = limit_family(&p).into_iter().take(3).collect();
    for n in 0..3i64 {
        let pi = CompactIrrep::parse(&p, &n.to_string()).unwrap();
        let exp = LimitExperiment::new(&p, pi).unwrap();
        let r = dilation_scan(&exp, &fam, &halving_grid(0.1, 2e-3), 0.02, 0, 1).unwrap();
        let want = if n % 2 == 0 { 1.0 } else { -1.0 };
        assert!((r.ratio_mean.re - want).abs() < 1e-6 && r.ratio_mean.im.abs() < 1e-8, "n={n}: {:?}", r.ratio_mean);
    }
}

#[test]
fn nongenuine_representations_give_zero() {
    for (pair, w) in [("O1_Sp2", "trivial:nongenuine"), ("U1_U11", "1:nongenuine")] {
        let p = catalog_pair(pair).unwrap();
        let exp = LimitExperiment::new(&p, CompactIrrep::parse(&p, w).unwrap()).unwrap();
        for (_, phi) in limit_family(&p) {
            assert_eq!(exp.intertwining_value(&phi).unwrap().value.norm(), 0.0);
        }
    }
}

#[test]
fn stable_range_multiplicity_is_dimension() {
    for (pair, w, dim) in [("U1_U11", "3", 1), ("U2_U22", "1,-1", 3), ("U2_U22", "2,0", 3)] {
        let p = catalog_pair(pair).unwrap();
        let pi = CompactIrrep::parse(&p, w).unwrap();
        let k = k_constant(&p, &pi, 1000, 2).unwrap();
        assert_eq!(k.multiplicity, dim, "{pair} {w}");
        assert_eq!(k.dim_pi, dim as u64);
    }
}
