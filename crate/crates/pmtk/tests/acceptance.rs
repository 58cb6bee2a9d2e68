//! Acceptance checks over the bundled experiment files.
//!
//! Each criterion reruns one or more configs and checks the raw record
//! numbers against the tolerances below, independently of the verdicts the
//! harness computes itself. One PASS/FAIL line per criterion; the process
//! exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;

use pmtk::record::RunRecord;
use pmtk::ExperimentConfig;
use pmtk_core::mass::Exhaustion;

const FLAT_MASS: f64 = 1e-8;
const FLAT_INTEGRAL: f64 = 1e-10;
const FLAT_FIELD: f64 = 1e-8;
const FLAT_SECONDS: f64 = 10.0;
const HS_MASS: f64 = 0.5;
const HS_MASS_TOL: f64 = 5e-4;
const FINITE_RADIUS_TOL: f64 = 1e-6;
const MASS_SECONDS: f64 = 5.0;
const EXHAUSTION_TOL: f64 = 1e-3;
const RESIDUAL_ORDER: f64 = 1.8;
const GRADIENT_STABILITY: f64 = 0.02;
const TOL_FRACTION: f64 = 0.05;
const ESTIMATE_SECONDS: f64 = 300.0;
const IDENTITY_ORDER: f64 = 1.0;
const COAREA_TOL: f64 = 0.02;
const DERIVATIVE_POINTS: usize = 1000;
const DERIVATIVE_ORDER: f64 = 1.9;
const DERIVATIVE_DEFECT: f64 = 1e-10;
const SCALE_MASS_TOL: f64 = 1e-3;
const SCALE_RHS_TOL: f64 = 0.05;

fn run(file: &str) -> Result<RunRecord, String> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(file);
    let cfg = ExperimentConfig::load(&path).map_err(|e| e.to_string())?;
    let rec = pmtk::run(&cfg).map_err(|e| format!("{file}: {e}"))?.record;
    if rec.exit_code() != 0 {
        let bad: Vec<_> = rec
            .verdicts
            .iter()
            .filter(|v| v.status != pmtk::Status::Pass && v.status != pmtk::Status::Skipped)
            .map(|v| format!("{} {}", v.rule, v.status))
            .collect();
        return Err(format!("{file}: harness verdicts {}", bad.join(", ")));
    }
    Ok(rec)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn seconds(rec: &RunRecord, stage: &str) -> f64 {
    rec.timings.get(stage).copied().unwrap_or(f64::INFINITY)
}

/// Orders log2(e_k / e_{k+1}) for a ladder that doubles every rung.
fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn mass_of(rec: &RunRecord, shape: Exhaustion) -> Result<f64, String> {
    rec.mass
        .iter()
        .find(|r| r.shape == shape)
        .map(|r| r.fit.mass)
        .ok_or_else(|| format!("{}: no {shape:?} study", rec.name))
}

fn flat_rigidity() -> Result<String, String> {
    let rec = run("c01_flat_rigidity.toml")?;
    let ineq = rec.inequality.as_ref().ok_or("no inequality report")?;
    let flat = rec.flat.as_ref().ok_or("no field deviation")?;
    let m = rec.mass.first().ok_or("no mass study")?.fit.mass;
    let (b, s, t) = (ineq.bulk.value, ineq.boundary, seconds(&rec, "total"));
    ensure(m.abs() <= FLAT_MASS, || format!("|m̂| = {m:e}"))?;
    ensure(ineq.mass.fit.mass.abs() <= FLAT_MASS, || format!("|m̂| = {:e}", ineq.mass.fit.mass))?;
    ensure(b.abs() <= FLAT_INTEGRAL, || format!("B = {b:e}"))?;
    ensure(s.abs() <= FLAT_INTEGRAL, || format!("S = {s:e}"))?;
    ensure(flat.field_deviation <= FLAT_FIELD, || format!("max |u - x3| = {:e}", flat.field_deviation))?;
    ensure(t <= FLAT_SECONDS, || format!("{t:.2} s"))?;
    Ok(format!(
        "|m̂| = {:.1e}, B = {b:.1e}, S = {s:.1e}, |u - x3| = {:.1e}, {t:.2} s",
        m.abs(),
        flat.field_deviation
    ))
}

fn half_schwarzschild_mass() -> Result<String, String> {
    let rec = run("c02_half_schwarzschild_mass.toml")?;
    let h = rec.mass.iter().find(|r| r.shape == Exhaustion::Hemisphere).ok_or("no hemisphere study")?;
    let radii: Vec<f64> = h.samples.iter().map(|s| s.0).collect();
    ensure(radii == [20.0, 40.0, 80.0, 160.0], || format!("ladder {radii:?}"))?;
    let err = (h.fit.mass - HS_MASS).abs();
    ensure(h.fit.converged && err <= HS_MASS_TOL, || format!("m̂ = {}", h.fit.mass))?;
    // Closed form of the hemisphere flux for m = 1, written out here.
    let dev = h
        .samples
        .iter()
        .map(|&(r, v)| (v - 0.5 * (1.0 + 0.5 / r).powi(3)).abs())
        .fold(0.0, f64::max);
    ensure(dev <= FINITE_RADIUS_TOL, || format!("finite-radius deviation {dev:e}"))?;
    let t = seconds(&rec, "mass");
    ensure(t <= MASS_SECONDS, || format!("{t:.2} s"))?;
    Ok(format!("m̂ = {:.6}, finite-radius deviation {dev:.1e}, {t:.2} s", h.fit.mass))
}

fn exhaustion() -> Result<String, String> {
    let rec = run("c03_exhaustion_half_schwarzschild.toml")?;
    let (a, b) = (mass_of(&rec, Exhaustion::Hemisphere)?, mass_of(&rec, Exhaustion::HalfCylinder)?);
    ensure((a - b).abs() <= EXHAUSTION_TOL, || format!("half-Schwarzschild {a} vs {b}"))?;
    let rec = run("c03_exhaustion_perturbed_flat.toml")?;
    let fit = |s| rec.mass.iter().find(|r| r.shape == s).map(|r| r.fit);
    let (p, q) = match (fit(Exhaustion::Hemisphere), fit(Exhaustion::HalfCylinder)) {
        (Some(p), Some(q)) => (p, q),
        _ => return Err("perturbed-flat: missing study".into()),
    };
    let allowed = p.residual + q.residual;
    ensure((p.mass - q.mass).abs() <= allowed, || {
        format!("perturbed {} vs {} (allowed {allowed:e})", p.mass, q.mass)
    })?;
    Ok(format!(
        "half-Schwarzschild Δ = {:.1e}; perturbed-flat Δ = {:.1e} ≤ {allowed:.1e}",
        (a - b).abs(),
        (p.mass - q.mass).abs()
    ))
}

fn bvp_fidelity() -> Result<String, String> {
    let rec = run("c04_bvp_fidelity.toml")?;
    let rungs = &rec.solver.as_ref().ok_or("no solver record")?.rungs;
    ensure(rungs.len() >= 3, || format!("{} rungs", rungs.len()))?;
    let res: Vec<f64> = rungs.iter().map(|r| r.residual).collect();
    let p = orders(&res);
    ensure(p.iter().all(|&p| p >= RESIDUAL_ORDER), || format!("residual orders {p:?}"))?;
    let g: Vec<f64> = rungs.iter().map(|r| r.min_gradient).collect();
    ensure(g.iter().all(|&g| g > 0.0), || format!("min |∇u| {g:?}"))?;
    let n = g.len();
    let change = (g[n - 1] - g[n - 2]).abs() / g[n - 1];
    ensure(change <= GRADIENT_STABILITY, || format!("min |∇u| changed by {change:.3}"))?;
    Ok(format!("residual orders {p:.3?}, min |∇u| {g:.4?}"))
}

fn estimate() -> Result<String, String> {
    let mut parts = Vec::new();
    for file in ["c05_estimate_half_schwarzschild.toml", "c05_estimate_two_bubble.toml"] {
        let rec = run(file)?;
        let r = rec.inequality.as_ref().ok_or("no inequality report")?;
        let (m, rhs, tol) = (r.mass.fit.mass, r.bulk.value + r.boundary, r.tolerance.total);
        ensure(m >= rhs - tol, || format!("{file}: m̂ = {m} < B + S - tol = {}", rhs - tol))?;
        ensure(tol < TOL_FRACTION * m, || format!("{file}: tol_total {tol:e} vs m̂ {m}"))?;
        let t = seconds(&rec, "total");
        ensure(t <= ESTIMATE_SECONDS, || format!("{file}: {t:.1} s"))?;
        parts.push(format!("{}: m̂ = {m:.5} ≥ B + S = {rhs:.5} - {tol:.1e} ({t:.1} s)", rec.name));
    }
    Ok(parts.join("; "))
}

fn identity() -> Result<String, String> {
    let rec = run("c06_normal_identity.toml")?;
    let d: Vec<f64> = rec.solver.as_ref().ok_or("no solver record")?.rungs.iter().map(|r| r.identity.max).collect();
    let p = orders(&d);
    ensure(!p.is_empty() && p.iter().all(|&p| p >= IDENTITY_ORDER), || format!("defects {d:?}"))?;
    let rec = run("c06_normal_identity_flat.toml")?;
    let flat = rec.solver.as_ref().ok_or("no solver record")?;
    ensure(flat.rungs.iter().all(|r| r.identity.max == 0.0 && r.identity.samples > 0), || {
        format!("flat defects {:?}", flat.rungs.iter().map(|r| r.identity.max).collect::<Vec<_>>())
    })?;
    Ok(format!("half-Schwarzschild orders {p:.2?}; flat defect 0"))
}

fn coarea() -> Result<String, String> {
    let rec = run("c07_coarea.toml")?;
    let m: Vec<f64> = rec.solver.as_ref().ok_or("no solver record")?.rungs.iter().map(|r| r.coarea.mismatch).collect();
    let last = *m.last().ok_or("no rungs")?;
    ensure(last <= COAREA_TOL, || format!("mismatch {last:e}"))?;
    ensure(m.windows(2).all(|w| w[1] < w[0]), || format!("not shrinking: {m:?}"))?;
    let m: Vec<String> = m.iter().map(|x| format!("{x:.2e}")).collect();
    Ok(format!("mismatch {}", m.join(", ")))
}

fn connectedness() -> Result<String, String> {
    let files = [
        "c08_connectedness_flat.toml",
        "c08_connectedness_half_schwarzschild.toml",
        "c08_connectedness_two_bubble.toml",
        "c08_connectedness_two_point_bubbles.toml",
        "c08_connectedness_perturbed_flat.toml",
        "c08_connectedness_scaled_half_schwarzschild.toml",
    ];
    let mut levels = 0;
    for file in files {
        let rec = run(file)?;
        let s = rec.solver.as_ref().ok_or("no solver record")?;
        for r in &s.rungs {
            ensure(!r.levels.is_empty(), || format!("{file}: no levels"))?;
            for l in &r.levels {
                ensure(l.touches_outer == [true], || {
                    format!("{file} {:?} t = {}: {:?}", r.nodes, l.level, l.touches_outer)
                })?;
                levels += 1;
            }
        }
        let neg = s.negative_control.as_ref().ok_or("no negative control")?;
        ensure(neg.touches_outer.contains(&false), || format!("{file}: control {:?}", neg.touches_outer))?;
    }
    Ok(format!("{levels} levels on {} metrics, each one lateral component; controls enclosed", files.len()))
}

fn derivatives() -> Result<String, String> {
    let rec = run("c09_derivatives.toml")?;
    ensure(rec.derivatives.len() >= 7, || format!("{} metrics", rec.derivatives.len()))?;
    let mut worst = f64::INFINITY;
    let mut defect = 0.0f64;
    for d in &rec.derivatives {
        let r = &d.report;
        ensure(r.points >= DERIVATIVE_POINTS, || format!("{}: {} points", d.metric, r.points))?;
        for e in [r.first, r.second] {
            // Constant metrics differentiate exactly; there is no order to observe.
            if e[0] <= 1e-14 && e[1] <= 1e-14 {
                continue;
            }
            let p = (e[0] / e[1]).log2();
            ensure(p >= DERIVATIVE_ORDER, || format!("{}: order {p:.3} from {e:?}", d.metric))?;
            worst = worst.min(p);
        }
        for x in [r.trace_defect, r.gradient_defect, r.hessian_asymmetry, r.inverse_defect] {
            ensure(x <= DERIVATIVE_DEFECT, || format!("{}: defect {x:e}", d.metric))?;
            defect = defect.max(x);
        }
    }
    Ok(format!(
        "{} metrics, worst order {worst:.3}, worst identity defect {defect:.1e}",
        rec.derivatives.len()
    ))
}

fn scale_covariance() -> Result<String, String> {
    let rec = run("c10_scale_covariance.toml")?;
    let s = rec.scale.as_ref().ok_or("no scale record")?;
    ensure(s.factor == 2.0, || format!("factor {}", s.factor))?;
    let (m0, m1) = (s.mass[0].fit.mass, s.mass[1].fit.mass);
    ensure((m1 - 2.0 * m0).abs() <= SCALE_MASS_TOL, || format!("m̂ {m0} -> {m1}"))?;
    let ratio = s.rhs[1] / (2.0 * s.rhs[0]);
    ensure((ratio - 1.0).abs() <= SCALE_RHS_TOL, || format!("B + S {} -> {}", s.rhs[0], s.rhs[1]))?;
    Ok(format!("m̂ {m0:.6} -> {m1:.6}, B + S {:.6} -> {:.6}", s.rhs[0], s.rhs[1]))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<String, String>); 10] = [
        ("flat rigidity", flat_rigidity),
        ("half-Schwarzschild mass", half_schwarzschild_mass),
        ("exhaustion invariance", exhaustion),
        ("boundary value problem fidelity", bvp_fidelity),
        ("mass estimate", estimate),
        ("normal-derivative identity", identity),
        ("coarea consistency", coarea),
        ("level-set connectedness", connectedness),
        ("derivative validation", derivatives),
        ("scale covariance", scale_covariance),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
