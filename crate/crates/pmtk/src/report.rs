//! Human-readable run report.

use std::fmt::Write;

use crate::record::RunRecord;
use crate::table::convergence_table;

pub fn render(r: &RunRecord) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "run {} ({}) on {}", r.name, r.kind, r.metric);
    let _ = writeln!(s, "toolkit {}, seed {}, workers {}", r.toolkit_version, r.seed, r.workers);
    for m in &r.mass {
        let _ = writeln!(
            s,
            "mass [{}]: m̂ = {:.9} (order {:.3}, residual {:.3e}, converged {})",
            m.shape.as_str(),
            m.mass(),
            m.fit.order,
            m.fit.residual,
            m.fit.converged
        );
        for (size, v) in &m.samples {
            let _ = writeln!(s, "  size {size:>10.3}  {v:.12}");
        }
    }
    if let Some(sol) = &r.solver {
        for g in &sol.rungs {
            let _ = writeln!(
                s,
                "solver {:?}: {} unknowns, {} iterations, residual {:.3e}, min|∇u| {:.6}, B {:.6}, S {:.3e}, identity {:.3e}, coarea {:.3e}",
                g.nodes, g.unknowns, g.iterations, g.residual, g.min_gradient, g.bulk, g.boundary,
                g.identity.max, g.coarea.mismatch
            );
        }
    }
    if let Some(c) = &r.convergence {
        s.push_str(&convergence_table(c));
    }
    if let Some(i) = &r.inequality {
        let _ = writeln!(s, "inequality (energy conditions sampled):");
        let _ = writeln!(s, "  m̂          {:.9}", i.mass.mass());
        let _ = writeln!(s, "  B          {:.9}", i.bulk.value);
        let _ = writeln!(s, "  S          {:.3e}", i.boundary);
        let _ = writeln!(s, "  slack      {:.9}", i.slack);
        let _ = writeln!(
            s,
            "  tol_total  {:.3e} (fit {:.3e}, refinement {:.3e}, truncation {:.3e})",
            i.tolerance.total, i.tolerance.fit, i.tolerance.refinement, i.tolerance.truncation
        );
        let _ = writeln!(s, "  verdict    {:?}", i.verdict);
        let _ = writeln!(
            s,
            "  sampled    min R = {:.3e} over {} points, min H = {:.3e} over {} points",
            i.energy.min_scalar, i.energy.bulk_points, i.energy.min_mean, i.energy.boundary_points
        );
        let _ = writeln!(
            s,
            "  solver     residual {:.3e}, min|∇u| on Σ {:.6}, {} iterations, {} unknowns",
            i.residual, i.min_gradient, i.iterations, i.unknowns
        );
        let _ = writeln!(
            s,
            "  ε-fraction {:.3e}, identity defect {:.3e}, coarea mismatch {:.3e}",
            i.bulk.eps_fraction, i.identity.max, i.coarea.mismatch
        );
        for l in &i.levels {
            let _ = writeln!(s, "  level {:.6}: components {:?}", l.level, l.touches_outer);
        }
    }
    for d in &r.derivatives {
        let _ = writeln!(
            s,
            "derivatives [{}]: errors ∂g {:.3e} → {:.3e}, ∂²g {:.3e} → {:.3e}",
            d.metric, d.report.first[0], d.report.first[1], d.report.second[0], d.report.second[1]
        );
    }
    if let Some(sc) = &r.scale {
        let _ = writeln!(
            s,
            "scale λ = {}: m̂ {:.9} → {:.9}, B + S {:.6} → {:.6}",
            sc.factor,
            sc.mass[0].mass(),
            sc.mass[1].mass(),
            sc.rhs[0],
            sc.rhs[1]
        );
    }
    let _ = writeln!(s, "verdicts:");
    for v in &r.verdicts {
        let _ = writeln!(s, "  {:<8} {}: {}", v.status.to_string(), v.rule, v.note);
    }
    let _ = writeln!(s, "timings:");
    for (k, t) in &r.timings {
        let _ = writeln!(s, "  {k:<12} {t:.3} s");
    }
    s
}
