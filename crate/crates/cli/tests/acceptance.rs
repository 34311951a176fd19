//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the table is always printed:
//! `cargo test -p orbitlab-cli --test acceptance`.

use std::process::Command as Proc;
use std::time::Instant;

use orbitlab_core::report::{run, Command, Record, Report, RunConfig, Status, Suite};
use serde_json::Value;

struct Outcome {
    ok: bool,
    detail: String,
}

fn records(cfg: &RunConfig) -> Vec<Record> {
    run(cfg).expect("valid configuration").records
}

fn check(suite: Suite) -> Vec<Record> {
    records(&RunConfig::new(Command::Check { suite }))
}

fn all_pass(rs: &[Record], anchor_prefix: &str) -> bool {
    let sel: Vec<&Record> = rs.iter().filter(|r| r.anchor.starts_with(anchor_prefix)).collect();
    !sel.is_empty() && sel.iter().all(|r| r.status != Status::Fail)
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn c1_orbit() -> Outcome {
    let t = Instant::now();
    let rs = check(Suite::Orbit);
    let secs = t.elapsed().as_secs_f64();
    let o3 = rs.iter().find(|r| r.anchor == "orbit.dimension.o3sp4").map(|r| f(&r.values["dim_Ok_prime"]));
    let ok = all_pass(&rs, "orbit.dimension") && o3 == Some(6.0) && secs < 10.0;
    Outcome { ok, detail: format!("{} records, dim O'_2(O3,Sp4) = {:?}, {secs:.2}s", rs.len(), o3) }
}

fn c2_homogeneity() -> Outcome {
    let rs = check(Suite::Homogeneity);
    let slopes: Vec<String> = rs
        .iter()
        .map(|r| format!("{}: {:.4} (want {})", r.values["handle"]["pair"].as_str().unwrap_or("?"), f(&r.values["slope"]), r.values["expected"]))
        .collect();
    Outcome { ok: rs.len() == 3 && all_pass(&rs, "measure.homogeneity"), detail: slopes.join(", ") }
}

fn c3_slice(rs: &[Record]) -> Outcome {
    let dets: Vec<String> = rs
        .iter()
        .filter(|r| r.anchor == "slice.map_determinant")
        .map(|r| format!("{}={}", r.values["pair"].as_str().unwrap_or("?"), f(&r.values["det"]).round()))
        .collect();
    let want = |p: &str, d: f64| rs.iter().any(|r| r.anchor == "slice.map_determinant" && r.values["pair"] == p && (f(&r.values["det"]) - d).abs() < 1e-6);
    let ok = all_pass(rs, "slice.additivity")
        && all_pass(rs, "slice.map_determinant")
        && all_pass(rs, "slice.dilation")
        && want("O1_Sp2", 1.0)
        && want("O2_Sp4", 2.0)
        && want("O3_Sp4", 4.0);
    Outcome { ok, detail: format!("determinants {}", dets.join(" ")) }
}

fn c4_jacobians(rs: &[Record]) -> Outcome {
    let worst = rs
        .iter()
        .filter(|r| r.anchor == "slice.jacobians")
        .map(|r| f(&r.values["fit"]["residual_w"]).max(f(&r.values["fit"]["residual_slice"])))
        .fold(0.0, f64::max);
    Outcome { ok: all_pass(rs, "slice.jacobians"), detail: format!("max log-det fit residual {worst:.2e}") }
}

fn c5_closed_forms(rs: &[Record]) -> Outcome {
    let vals: Vec<String> = rs
        .iter()
        .filter(|r| r.anchor == "measure.f_n.closed_form" && r.values["path"] == "quadrature")
        .map(|r| format!("f{}={:.9}", r.values["n"], f(&r.values["value"])))
        .collect();
    let enough_phis = rs
        .iter()
        .filter(|r| r.anchor == "measure.sphere_reduction")
        .all(|r| r.values["ratios"].as_array().map_or(0, |a| a.len()) >= 5);
    let consts: Vec<String> = rs
        .iter()
        .filter(|r| r.anchor == "measure.sphere_reduction.constant")
        .map(|r| format!("n={} c={:.6} (claimed {:.6})", r.values["n"], f(&r.values["empirical"]), f(&r.values["claimed"])))
        .collect();
    let ok = all_pass(rs, "measure.f_n.closed_form") && all_pass(rs, "measure.sphere_reduction") && enough_phis;
    Outcome { ok, detail: format!("{}; {}", vals.join(" "), consts.join(", ")) }
}

fn c6_slice_mass(rs: &[Record]) -> Outcome {
    let r = rs.iter().find(|r| r.anchor == "measure.slice_restriction").expect("slice mass record");
    let u = &r.values["unit_bump"];
    Outcome {
        ok: r.status == Status::Pass,
        detail: format!(
            "limit {:.6}, spread {:.2e}, doubled bump {:.6}",
            f(&u["limit"]),
            f(&u["spread"]),
            f(&r.values["double_bump"]["limit"])
        ),
    }
}

fn c7_weil() -> Outcome {
    let rs = check(Suite::Weil);
    let worst = rs.iter().filter(|r| r.anchor == "weil.magnitude").map(|r| f(&r.values["magnitude_error"])).fold(0.0, f64::max);
    let coc = rs
        .iter()
        .find(|r| r.anchor == "weil.cocycle" && r.values["pair"] == "U1_U11")
        .map(|r| (r.status, f(&r.values["cocycle_error"])));
    let ok = all_pass(&rs, "weil.magnitude") && matches!(coc, Some((Status::Pass, _)));
    Outcome { ok, detail: format!("max magnitude error {worst:.2e}, U1_U11 cocycle {:.2e}", coc.map_or(f64::NAN, |c| c.1)) }
}

fn limit_config(pair: &str, weight: &str) -> RunConfig {
    let mut c = RunConfig::new(Command::Limit { weight: weight.into(), phi_preset: "family".into(), t_min: 1e-3 });
    c.pairs = vec![pair.into()];
    c
}

fn c8_o1_limit() -> Outcome {
    let t = Instant::now();
    let rs = records(&limit_config("O1_Sp2", "trivial"));
    let secs = t.elapsed().as_secs_f64();
    let scan = rs.iter().find(|r| r.anchor == "limit.ratio_consistency").expect("scan");
    let c = &scan.values["ratio_mean"];
    let n_phi = scan.values["phis"].as_array().map_or(0, |a| a.len());
    let ok = scan.status == Status::Pass && all_pass(&rs, "limit.identity_term_vanishes") && n_phi >= 5 && secs < 300.0;
    Outcome { ok, detail: format!("c = {:.10} over {n_phi} phis, spread {:.1e}, {secs:.2}s", f(&c[0]), f(&scan.values["ratio_spread"])) }
}

fn c9_u1_limit() -> Outcome {
    let rs = records(&limit_config("U1_U11", "1"));
    let scan = rs.iter().find(|r| r.anchor == "limit.ratio_consistency").expect("scan");
    let ctrl = rs.iter().find(|r| r.anchor == "limit.negative_control").expect("control");
    let ok = rs.iter().all(|r| r.status != Status::Fail) && scan.values["phis"].as_array().map_or(0, |a| a.len()) >= 5;
    let c = &scan.values["ratio_mean"];
    Outcome {
        ok,
        detail: format!(
            "ratio {:.8}{:+.1e}i, spread {:.1e}; control max |limit| {:.1e}",
            f(&c[0]),
            f(&c[1]),
            f(&scan.values["ratio_spread"]),
            f(&ctrl.values["max_abs_limit"])
        ),
    }
}

fn c10_k() -> Outcome {
    let rs = check(Suite::K);
    let summary: Vec<String> = rs
        .iter()
        .map(|r| format!("{} {}: {}", r.values["pair"].as_str().unwrap_or("?"), r.values["weight"].as_str().unwrap_or("?"), r.values["multiplicity"]))
        .collect();
    Outcome { ok: all_pass(&rs, "limit.k_structure"), detail: summary.join(", ") }
}

fn c11_degree() -> Outcome {
    let rs = check(Suite::Degree);
    let summary: Vec<String> = rs
        .iter()
        .map(|r| {
            let d = &r.values["report"];
            format!("{} {}", r.values["pair"].as_str().unwrap_or("?"), if d["equality"] == true { "equality" } else { "strict" })
        })
        .collect();
    Outcome { ok: rs.len() == 3 && all_pass(&rs, "limit.degree_recursion"), detail: summary.join(", ") }
}

fn c12_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_orbitlab");
    let dir = std::env::temp_dir().join(format!("orbitlab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut ok = true;
    let mut n = 0;
    let cases: [&[&str]; 3] = [&["check", "measures"], &["check", "homogeneity"], &["limit", "--pairs", "U1_U11", "--weight", "1"]];
    for (i, args) in cases.iter().enumerate() {
        let a = dir.join(format!("a{i}.json"));
        let b = dir.join(format!("b{i}.json"));
        let st = Proc::new(bin).args(*args).arg("--out").arg(&a).output().unwrap();
        let rp = Proc::new(bin).arg("replay").arg(&a).arg("--out").arg(&b).output().unwrap();
        let ra = Report::from_json(&std::fs::read_to_string(&a).unwrap()).unwrap();
        let rb = Report::from_json(&std::fs::read_to_string(&b).unwrap()).unwrap();
        ok &= st.status.success() && rp.status.success() && ra.canonical_json() == rb.canonical_json();
        n += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Outcome { ok, detail: format!("{n} reports regenerated from their embedded config") }
}

fn main() {
    let slice = check(Suite::Slice);
    let measures = check(Suite::Measures);
    let results: Vec<(&str, Outcome)> = vec![
        ("orbit dimensions match the tangent-rank oracle", c1_orbit()),
        ("homogeneity degrees of orbital integrals", c2_homogeneity()),
        ("slice identities", c3_slice(&slice)),
        ("dilation Jacobians are monomials", c4_jacobians(&slice)),
        ("closed forms of the f_n measures", c5_closed_forms(&measures)),
        ("slice restriction mass", c6_slice_mass(&measures)),
        ("Weil character magnitude and cocycle", c7_weil()),
        ("dilation limit, (O1, Sp2)", c8_o1_limit()),
        ("dilation limit, (U1, U1,1)", c9_u1_limit()),
        ("K-structure multiplicities", c10_k()),
        ("degree recursion", c11_degree()),
        ("determinism of regenerated reports", c12_determinism()),
    ];
    let mut failed = Vec::new();
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} {:>2}. {name}: {}", if o.ok { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.ok {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
