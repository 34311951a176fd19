//! Run configuration, check records and the suites behind the command line.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dual_pair::{catalog, catalog_pair, DualPairSpec};
use crate::error::{Error, Result};
use crate::limit::{
    degree_recursion_check, dilation_scan, halving_grid, k_constant, limit_family, wavefront_report, CompactIrrep, IrrepGroup,
    LimitExperiment, LimitReport,
};
use crate::measure::fmeasure::{f_n_mc, f_n_quadrature, slice_mass_scan, sphere_reduction_check, Bump};
use crate::measure::homogeneity::{homogeneity_scan, log_grid, MeasureHandle};
use crate::measure::orbital::orbital_integral;
use crate::measure::TestFunction;
use crate::orbit::{atlas, AtlasRow};
use crate::slice::{apply_gt, build_slice, gt_log_det_fit, slice_map_det, slice_map_det_closed_form, tau_additivity_check};
use crate::weil::weil_consistency;
use crate::Algebra;

pub const SCHEMA: &str = "orbitlab/1";
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: usize = 200_000;

/// The pairs every suite covers by default.
pub const PRIMARY_PAIRS: [&str; 8] = ["O1_Sp2", "O2_Sp4", "O3_Sp4", "O3_Sp8", "U1_U11", "U2_U11", "U2_U22", "Sp1_Ostar4"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Orbit,
    Homogeneity,
    Slice,
    Measures,
    Weil,
    K,
    Degree,
    Wavefront,
    All,
}

impl Suite {
    pub const ALL: [Suite; 8] = [Suite::Orbit, Suite::Homogeneity, Suite::Slice, Suite::Measures, Suite::Weil, Suite::K, Suite::Degree, Suite::Wavefront];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Orbit => "orbit",
            Suite::Homogeneity => "homogeneity",
            Suite::Slice => "slice",
            Suite::Measures => "measures",
            Suite::Weil => "weil",
            Suite::K => "k",
            Suite::Degree => "degree",
            Suite::Wavefront => "wavefront",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Command {
    Atlas,
    Check { suite: Suite },
    Integrate { k: Option<usize>, phi: String, t_grid: Option<Vec<f64>> },
    Limit { weight: String, phi_preset: String, t_min: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Empty means the command's default pairs.
    pub pairs: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: Option<String>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig { command, pairs: Vec::new(), seed: DEFAULT_SEED, samples: DEFAULT_SAMPLES, tolerances: BTreeMap::new(), output: None }
    }

    fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    fn pairs_or(&self, default: &[&str]) -> Result<Vec<DualPairSpec>> {
        if self.pairs.is_empty() {
            default.iter().map(|n| catalog_pair(n)).collect()
        } else {
            self.pairs.iter().map(|n| catalog_pair(n)).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub anchor: String,
    pub status: Status,
    pub values: Value,
    pub tolerances: BTreeMap<String, f64>,
}

impl Record {
    fn new(name: &str, anchor: &str, ok: bool, values: Value, tols: &[(&str, f64)]) -> Self {
        Record {
            name: name.to_string(),
            anchor: anchor.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            values,
            tolerances: tols.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn info(name: &str, anchor: &str, values: Value) -> Self {
        Record { name: name.to_string(), anchor: anchor.to_string(), status: Status::Info, values, tolerances: BTreeMap::new() }
    }

    fn error(name: &str, anchor: &str, pair: &str, e: &Error) -> Self {
        Record::new(name, anchor, false, json!({ "pair": pair, "error": e.to_string() }), &[])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub config: RunConfig,
    pub records: Vec<Record>,
    pub wall_clock_s: f64,
}

impl Report {
    /// True when no record failed.
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the wall-clock field zeroed, for byte comparisons.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.wall_clock_s = 0.0;
        r.to_json()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Report = serde_json::from_str(s).map_err(|e| Error::Config(format!("not a report: {e}")))?;
        if r.schema != SCHEMA {
            return Err(Error::Config(format!("unsupported schema '{}'", r.schema)));
        }
        Ok(r)
    }
}

/// Runs a configuration; `Err` only for configuration errors.
pub fn run(config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let records = match &config.command {
        Command::Atlas => atlas_records(config)?,
        Command::Check { suite } => check_suite(config, *suite)?,
        Command::Integrate { k, phi, t_grid } => integrate_records(config, *k, phi, t_grid.as_deref())?,
        Command::Limit { weight, phi_preset, t_min } => limit_records(config, weight, phi_preset, *t_min)?,
    };
    Ok(Report {
        schema: SCHEMA.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        records,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

pub fn check_suite(config: &RunConfig, suite: Suite) -> Result<Vec<Record>> {
    match suite {
        Suite::Orbit => orbit_suite(config),
        Suite::Homogeneity => homogeneity_suite(config),
        Suite::Slice => slice_suite(config),
        Suite::Measures => measures_suite(config),
        Suite::Weil => weil_suite(config),
        Suite::K => k_suite(config),
        Suite::Degree => degree_suite(config),
        Suite::Wavefront => wavefront_suite(config),
        Suite::All => {
            let mut out = Vec::new();
            for s in Suite::ALL {
                out.extend(check_suite(config, s)?);
            }
            Ok(out)
        }
    }
}

/// Atlas rows for `k = 0..=m` of every requested pair.
pub fn atlas_rows(config: &RunConfig) -> Result<Vec<AtlasRow>> {
    let mut rows = Vec::new();
    for p in config.pairs_or(&PRIMARY_PAIRS)? {
        rows.extend(atlas(&p)?);
    }
    Ok(rows)
}

fn atlas_records(config: &RunConfig) -> Result<Vec<Record>> {
    Ok(atlas_rows(config)?
        .into_iter()
        .map(|row| Record::new("stratum_dim_formula", "orbit.dimension", row.agree, serde_json::to_value(&row).expect("row"), &[]))
        .collect())
}

fn orbit_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for p in config.pairs_or(&PRIMARY_PAIRS)? {
        let rows: Vec<AtlasRow> = atlas(&p)?.into_iter().filter(|r| r.k >= 1).collect();
        let ok = rows.iter().all(|r| r.agree && r.oracle_dim_prime == r.dim_ok_prime);
        out.push(Record::new("orbit_dim_oracle", "orbit.dimension", ok, json!({ "pair": p.name(), "rows": rows }), &[]));
    }
    // Cross-checks: dim O'_2 for (O3, Sp4) and the minimal orbit of (O1, Sp_2l).
    let o3 = catalog_pair("O3_Sp4")?;
    let d = atlas(&o3)?[2].dim_ok_prime;
    out.push(Record::new("stratum_dim_formula", "orbit.dimension.o3sp4", d == 6, json!({ "pair": "O3_Sp4", "k": 2, "dim_Ok_prime": d, "expected": 6 }), &[]));
    for name in ["O1_Sp2", "O1_Sp4", "O1_Sp6"] {
        let p = catalog_pair(name)?;
        let d = atlas(&p)?[1].dim_ok_prime;
        out.push(Record::new(
            "stratum_dim_formula",
            "orbit.dimension.minimal",
            d == p.d_prime(),
            json!({ "pair": name, "k": 1, "dim_Ok_prime": d, "expected": p.d_prime() }),
            &[],
        ));
    }
    Ok(out)
}

fn homogeneity_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let tol = config.tol("homogeneity_slope", 0.1);
    let pairs = config.pairs_or(&["O1_Sp2", "O3_Sp4", "U1_U11"])?;
    let ts = log_grid(0.25, 4.0, 5);
    let mut out = Vec::new();
    for p in pairs {
        let h = MeasureHandle::OrbitalIntegral { pair: p.name().to_string(), k: p.m() };
        match homogeneity_scan(&h, None, &ts, config.samples, config.seed) {
            Ok(r) => out.push(Record::new(
                "homogeneity_scan",
                "measure.homogeneity",
                (r.slope - r.expected as f64).abs() <= tol,
                serde_json::to_value(&r).expect("report"),
                &[("slope", tol)],
            )),
            Err(e) => out.push(Record::error("homogeneity_scan", "measure.homogeneity", p.name(), &e)),
        }
    }
    Ok(out)
}

fn slice_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let tol = config.tol("slice_identity", 1e-12);
    let fit_tol = config.tol("jacobian_fit", 1e-10);
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for p in config.pairs_or(&PRIMARY_PAIRS)? {
        let name = p.name().to_string();
        let chart = match build_slice(&p, p.m()) {
            Ok(c) => c,
            Err(e) => {
                out.push(Record::error("build_slice", "slice.chart", &name, &e));
                continue;
            }
        };
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let v = chart.random_r_n(&mut rng);
            let w = chart.random_w_n(&mut rng);
            let r = tau_additivity_check(&chart, &v, &w)?;
            worst = worst.max(r.residual).max(r.cross).max(r.placement);
        }
        out.push(Record::new("tau_additivity_check", "slice.additivity", worst < tol, json!({ "pair": name, "points": 100, "max_residual": worst }), &[("residual", tol)]));

        let det = slice_map_det(&chart)?;
        let closed = slice_map_det_closed_form(&p);
        out.push(Record::new(
            "slice_map_det",
            "slice.map_determinant",
            det.round() == closed.round() && (det - det.round()).abs() < 1e-6,
            json!({ "pair": name, "det": det, "closed_form": closed }),
            &[("rounding", 1e-6)],
        ));

        let mut worst_scale = 0.0f64;
        for t in [0.5, 2.0, 3.0] {
            let u = chart.random_vector(&mut rng);
            let lhs = p.moment_tau(&apply_gt(&chart, t, &u)?)?;
            let rhs = p.moment_tau(&u)?.scale(t * t);
            worst_scale = worst_scale.max((&lhs - &rhs).max_abs() / rhs.max_abs().max(1.0));
        }
        out.push(Record::new("apply_gt", "slice.dilation", worst_scale < tol, json!({ "pair": name, "max_relative_residual": worst_scale }), &[("residual", tol)]));

        let fit = gt_log_det_fit(&chart, &[0.5, 1.0, 2.0, 4.0])?;
        let ok = fit.residual_w < fit_tol
            && fit.residual_slice < fit_tol
            && (fit.slope_w - fit.expected_w as f64).abs() < fit_tol
            && (fit.slope_slice - fit.expected_slice as f64).abs() < fit_tol;
        out.push(Record::new("gt_jacobians", "slice.jacobians", ok, json!({ "pair": name, "fit": fit }), &[("fit", fit_tol)]));
    }
    Ok(out)
}

fn measures_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let q_tol = config.tol("closed_form_quadrature", 1e-6);
    let z = config.tol("closed_form_sigma", 3.0);
    let spread_tol = config.tol("slice_mass_spread", 0.1);
    let mut out = Vec::new();
    let want = [1.0, std::f64::consts::PI, 2.0 * std::f64::consts::PI];
    for n in 1..=3 {
        let phi = TestFunction::standard(2 * n);
        let q = f_n_quadrature(n, &phi)?;
        out.push(Record::new(
            "f_n_measure",
            "measure.f_n.closed_form",
            (q.value - want[n - 1]).abs() < q_tol,
            json!({ "m": 1, "n": n, "path": "quadrature", "value": q.value, "error": q.error, "expected": want[n - 1] }),
            &[("abs", q_tol)],
        ));
        let e = f_n_mc(1, n, &phi, config.samples, config.seed.wrapping_add(n as u64))?;
        out.push(Record::new(
            "f_n_measure",
            "measure.f_n.closed_form",
            (e.value - want[n - 1]).abs() < z * e.std_error,
            json!({ "m": 1, "n": n, "path": "monte_carlo", "estimate": e, "expected": want[n - 1] }),
            &[("sigma", z)],
        ));
    }
    for n in [2, 3] {
        let r = sphere_reduction_check(1, n, 0, config.seed)?;
        out.push(Record::new(
            "sphere_reduction_check",
            "measure.sphere_reduction",
            r.phi_independent,
            serde_json::to_value(&r).expect("report"),
            &[("sigma", 3.0)],
        ));
        out.push(Record::info(
            "sphere_reduction_check",
            "measure.sphere_reduction.constant",
            json!({ "m": 1, "n": n, "empirical": r.empirical_constant, "claimed": r.claimed_constant, "ratio": r.empirical_constant / r.claimed_constant }),
        ));
    }
    let one = slice_mass_scan(1, 2, Bump::Gaussian { amp: 1.0, width: 1.0 }, config.samples, config.seed)?;
    let two = slice_mass_scan(1, 2, Bump::Gaussian { amp: 2.0, width: 1.0 }, config.samples, config.seed)?;
    let linear = (two.limit - 2.0 * one.limit).abs() <= spread_tol * one.limit.abs();
    out.push(Record::new(
        "slice_restriction_mass",
        "measure.slice_restriction",
        one.limit.abs() > 0.0 && one.spread < spread_tol && linear,
        json!({ "unit_bump": one, "double_bump": two }),
        &[("spread", spread_tol)],
    ));
    out.push(Record::info(
        "slice_restriction_mass",
        "measure.slice_restriction.normalization",
        json!({ "limit": one.limit, "dirac_prediction": one.predicted }),
    ));
    Ok(out)
}

fn weil_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let mag_tol = config.tol("weil_magnitude", 1e-10);
    let coc_tol = config.tol("weil_cocycle", 1e-8);
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for p in config.pairs_or(&PRIMARY_PAIRS)? {
        let r = match weil_consistency(&p, 100, &mut rng) {
            Ok(r) => r,
            Err(e) => {
                out.push(Record::error("theta_on_cayley", "weil.magnitude", p.name(), &e));
                continue;
            }
        };
        out.push(Record::new(
            "theta_on_cayley",
            "weil.magnitude",
            r.magnitude_error < mag_tol && r.det_path_error < mag_tol,
            json!({ "pair": p.name(), "samples": r.samples, "magnitude_error": r.magnitude_error, "det_path_error": r.det_path_error }),
            &[("magnitude", mag_tol)],
        ));
        let cocycle = json!({ "pair": p.name(), "cocycle_error": r.cocycle_error, "jacobian_error": r.jacobian_error });
        if p.name() == "U1_U11" {
            let ok = r.cocycle_error.is_some_and(|e| e < coc_tol);
            out.push(Record::new("gaussian_pairing", "weil.cocycle", ok, cocycle, &[("cocycle", coc_tol)]));
        } else {
            out.push(Record::info("gaussian_pairing", "weil.cocycle", cocycle));
        }
    }
    Ok(out)
}

/// `(pair, weight)` cases of the K suite.
pub const K_CASES: [(&str, &str); 6] = [("O1_Sp2", "trivial"), ("U1_U11", "1"), ("U2_U11", "1,-1"), ("U2_U11", "1,1"), ("U2_U22", "0,0"), ("U2_U22", "2,-1")];

fn k_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let tol = config.tol("multiplicity_residual", 0.02);
    let mut out = Vec::new();
    let cases: Vec<(String, String)> = if config.pairs.is_empty() {
        K_CASES.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    } else {
        config.pairs.iter().map(|p| (p.clone(), "trivial".to_string())).collect()
    };
    for (pair, weight) in cases {
        let p = catalog_pair(&pair)?;
        let pi = CompactIrrep::parse(&p, &weight)?;
        match k_constant(&p, &pi, config.samples, config.seed) {
            Ok(k) => {
                let mut ok = k.residual.abs() < tol && k.multiplicity >= 0;
                if k.occurs {
                    ok &= k.multiplicity >= 1;
                }
                if p.d() == p.m() {
                    ok &= k.multiplicity == k.dim_pi as i64;
                }
                out.push(Record::new("k_constant", "limit.k_structure", ok, serde_json::to_value(&k).expect("report"), &[("residual", tol)]));
            }
            Err(e) => out.push(Record::error("k_constant", "limit.k_structure", &pair, &e)),
        }
    }
    Ok(out)
}

fn degree_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for p in config.pairs_or(&catalog_names())? {
        if p.alg() != Algebra::R || p.d() < 2 {
            continue;
        }
        let r = degree_recursion_check(p.d(), p.d_prime() / 2)?;
        out.push(Record::new(
            "degree_recursion_check",
            "limit.degree_recursion",
            r.holds && r.delta_dim_w == p.d_prime() as i64,
            json!({ "pair": p.name(), "report": r }),
            &[],
        ));
    }
    Ok(out)
}

fn wavefront_suite(config: &RunConfig) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for p in config.pairs_or(&PRIMARY_PAIRS)? {
        let r = wavefront_report(&p)?;
        out.push(Record::new(
            "wavefront_report",
            "limit.wavefront",
            r.dims == r.oracle_dims && r.nilpotency_residual < 1e-12,
            serde_json::to_value(&r).expect("report"),
            &[("nilpotency", 1e-12)],
        ));
    }
    Ok(out)
}

/// Named test functions on `W` for a pair: `gauss` and the limit family.
pub fn phi_preset(p: &DualPairSpec, name: &str) -> Result<TestFunction> {
    if name == "gauss" || name == "standard" {
        return Ok(TestFunction::standard(p.dim_w()));
    }
    limit_family(p)
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, f)| f)
        .ok_or_else(|| Error::Config(format!("unknown test function preset '{name}'")))
}

fn integrate_records(config: &RunConfig, k: Option<usize>, phi: &str, t_grid: Option<&[f64]>) -> Result<Vec<Record>> {
    let tol = config.tol("homogeneity_slope", 0.1);
    let mut out = Vec::new();
    for p in config.pairs_or(&["O1_Sp2"])? {
        let k = k.unwrap_or(p.m());
        if k > p.m() {
            return Err(Error::Config(format!("k = {k} exceeds m = {} for {}", p.m(), p.name())));
        }
        let f = phi_preset(&p, phi)?;
        match orbital_integral(&p, k, &f, config.samples, config.seed) {
            Ok(e) => out.push(Record::info("orbital_integral_mu", "measure.orbital", json!({ "pair": p.name(), "k": k, "phi": phi, "estimate": e }))),
            Err(e) => out.push(Record::error("orbital_integral_mu", "measure.orbital", p.name(), &e)),
        }
        if let Some(ts) = t_grid {
            let h = MeasureHandle::OrbitalIntegral { pair: p.name().to_string(), k };
            match homogeneity_scan(&h, Some(&f), ts, config.samples, config.seed) {
                Ok(r) => out.push(Record::new(
                    "homogeneity_scan",
                    "measure.homogeneity",
                    (r.slope - r.expected as f64).abs() <= tol,
                    serde_json::to_value(&r).expect("report"),
                    &[("slope", tol)],
                )),
                Err(e) => out.push(Record::error("homogeneity_scan", "measure.homogeneity", p.name(), &e)),
            }
        }
    }
    Ok(out)
}

fn c_rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Records of a dilation-limit experiment for one pair and weight.
fn limit_records(config: &RunConfig, weight: &str, phi_preset_name: &str, t_min: f64) -> Result<Vec<Record>> {
    if !(t_min > 0.0 && t_min < 0.1) {
        return Err(Error::Config(format!("t_min must lie in (0, 0.1), got {t_min}")));
    }
    let pairs = config.pairs_or(&["O1_Sp2"])?;
    let mut out = Vec::new();
    for p in pairs {
        let pi = CompactIrrep::parse(&p, weight)?;
        let exp = LimitExperiment::new(&p, pi.clone())?;
        let family = limit_family(&p);
        let phis: Vec<(String, TestFunction)> = match phi_preset_name {
            "family" => family.clone(),
            name => vec![(name.to_string(), phi_preset(&p, name)?)],
        };
        let is_o1 = matches!(pi.group, IrrepGroup::O1);
        let ratio_tol = config.tol("limit_ratio", if is_o1 { 0.01 } else { 0.02 });
        let drift_tol = config.tol("limit_extrapolation", 0.02);
        let ts = halving_grid(0.1, t_min);
        let name = p.name().to_string();

        // intertwining_value properties on the first test function
        let f0 = &family[0].1;
        let f1 = &family[1].1;
        let v0 = exp.intertwining_value(f0)?.value;
        let v1 = exp.intertwining_value(f1)?.value;
        let v01 = exp.intertwining_value(&f0.add(f1)?)?.value;
        let lin = c_rel(v01, v0 + v1);
        let lin_tol = config.tol("linearity", 1e-10);
        out.push(Record::new("intertwining_value", "limit.linearity", lin < lin_tol, json!({ "pair": name, "relative_gap": lin }), &[("relative", lin_tol)]));
        if is_o1 {
            let id = f0.eval(&crate::linalg::Vector::zeros(p.dim_w()));
            out.push(Record::info("intertwining_value", "limit.identity_component", json!({ "pair": name, "identity_component_term": id, "phi_at_origin": id })));
        } else {
            let step_tol = config.tol("step_halving", 1e-6);
            let a = exp.intertwining_value_with_step(f0, 0.1)?;
            let b = exp.intertwining_value_with_step(f0, 0.05)?;
            let gap = c_rel(a, b);
            out.push(Record::new(
                "intertwining_value",
                "limit.step_halving",
                gap < step_tol && b.norm().is_finite(),
                json!({ "pair": name, "value_h": [a.re, a.im], "value_h_half": [b.re, b.im], "relative_gap": gap }),
                &[("relative", step_tol)],
            ));
            let mut worst = 0.0f64;
            for t in [0.5, 0.1, 0.02] {
                let x = exp.intertwining_value(&f0.dilate(t))?.value;
                let y = exp.intertwining_value_rescaled(f0, t)?.value;
                worst = worst.max(c_rel(y, x));
            }
            let cov_tol = config.tol("dilation_covariance", 1e-8);
            out.push(Record::new("intertwining_value", "limit.dilation_covariance", worst < cov_tol, json!({ "pair": name, "max_relative_gap": worst }), &[("relative", cov_tol)]));
        }

        let scan = dilation_scan(&exp, &phis, &ts, drift_tol, config.samples, config.seed)?;
        out.push(scan_record(&scan, ratio_tol, drift_tol, &name));
        if let Some(idt) = &scan.identity_term {
            let first = idt[0].abs();
            let last = idt.last().copied().unwrap_or(0.0).abs();
            out.push(Record::new(
                "dilation_scan",
                "limit.identity_term_vanishes",
                last < 1e-3 * first.max(f64::MIN_POSITIVE) || first == 0.0,
                json!({ "pair": name, "ts": ts, "scaled_identity_term": idt }),
                &[("decay", 1e-3)],
            ));
        }
        // refined grid
        let refined = dilation_scan(&exp, &phis, &halving_grid(0.1, t_min / 2.0), drift_tol, config.samples, config.seed)?;
        let worst = scan
            .phis
            .iter()
            .zip(&refined.phis)
            .map(|(a, b)| c_rel(b.limit, a.limit).max(if a.limit.norm() == 0.0 { b.limit.norm() } else { 0.0 }))
            .fold(0.0, f64::max);
        let allowed = scan.phis.iter().map(|s| s.extrapolation_drift).fold(0.0, f64::max).max(1e-9) * 10.0;
        out.push(Record::new(
            "dilation_scan",
            "limit.grid_refinement",
            worst <= allowed,
            json!({ "pair": name, "max_relative_change": worst, "allowed": allowed }),
            &[],
        ));

        // K: predicted constant against the measured ratio
        if pi.genuine {
            if let Ok(k) = k_constant(&p, &pi, config.samples, config.seed) {
                let predicted = k.k;
                out.push(Record::info(
                    "k_constant",
                    "limit.k_ratio",
                    json!({
                        "pair": name,
                        "weight": pi.label(),
                        "predicted_k": [predicted.re, predicted.im],
                        "measured_ratio": [scan.ratio_mean.re, scan.ratio_mean.im],
                        "measured_over_predicted": if predicted.norm() > 0.0 { let q = scan.ratio_mean / predicted; json!([q.re, q.im]) } else { Value::Null },
                    }),
                ));
            }
        }

        // negative control: a non-genuine representation with the same weight
        if pi.genuine {
            let mut ng = pi.clone();
            ng.genuine = false;
            let e = LimitExperiment::new(&p, ng)?;
            let v = exp_limit_abs(&e, &phis, &ts, drift_tol, config)?;
            out.push(Record::new(
                "dilation_scan",
                "limit.negative_control",
                v <= 1e-12 * scan.max_abs_limit.max(1.0),
                json!({ "pair": name, "weight": format!("{}:nongenuine", pi.label()), "max_abs_limit": v }),
                &[],
            ));
        }
    }
    Ok(out)
}

fn exp_limit_abs(e: &LimitExperiment, phis: &[(String, TestFunction)], ts: &[f64], tol: f64, config: &RunConfig) -> Result<f64> {
    Ok(dilation_scan(e, phis, ts, tol, config.samples, config.seed)?.max_abs_limit)
}

fn scan_record(scan: &LimitReport, ratio_tol: f64, drift_tol: f64, pair: &str) -> Record {
    let nonzero = scan.max_abs_limit > 1e-8 && scan.ratio_mean.norm() > 1e-8;
    let ok = if scan.occurs { nonzero && scan.converged && scan.ratio_spread <= ratio_tol } else { scan.max_abs_limit <= 1e-6 };
    let mut v = serde_json::to_value(scan).expect("report");
    v["pair"] = json!(pair);
    Record::new("dilation_scan", "limit.ratio_consistency", ok, v, &[("ratio_spread", ratio_tol), ("extrapolation", drift_tol)])
}

/// Every catalog pair name.
pub fn catalog_names() -> Vec<&'static str> {
    catalog().into_iter().map(|(n, _)| n).collect()
}
