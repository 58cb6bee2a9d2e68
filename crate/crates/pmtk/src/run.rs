//! Experiment pipelines and their verdict rules.

use std::collections::BTreeMap;
use std::time::Instant;

use pmtk_core::convergence::{orders_from_errors, Order};
use pmtk_core::geometry::{derivative_check, DerivativeCheckConfig};
use pmtk_core::inequality::{
    check_inequality, evaluate, interior_levels, level_connectedness, InequalityConfig, Verdict,
};
use pmtk_core::mass::{mass_study, Exhaustion, MassReport};
use pmtk_core::metric::MetricField;
use pmtk_core::solver::{
    assemble, build_domain, min_gradient_on_sigma, residual, solve, DiscreteField, Domain, Truncation,
};

use crate::config::{
    quadrature, radii_or_default, DerivativeSection, ExperimentConfig, ExperimentKind,
    InequalitySection, MassSection, ScaleSection, SolverCheck, SolverSection, VerdictTolerances,
};
use crate::error::Result;
use crate::metrics::{build_metric, exact_mass, hemisphere_closed_form, Family, MetricSpec};
use crate::record::{
    ConvergenceRecord, DerivativeRecord, FlatRecord, Observable, RungRecord, RunRecord,
    ScaleRecord, Series, SolverRecord, Status, VerdictRecord,
};

/// A record plus the finest solved field, kept for optional dumps.
pub struct RunOutput {
    pub record: RunRecord,
    pub field: Option<DiscreteField>,
}

/// Runs the experiment. Configuration problems are returned as errors;
/// numerical failures inside a stage become `ERRORED` verdicts.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let metric = build_metric(&config.metric)?;
    let start = Instant::now();
    let mut rec = RunRecord {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        name: config.name.clone(),
        kind: config.kind.as_str().to_string(),
        seed: config.seed,
        workers: rayon::current_num_threads(),
        metric: metric.name(),
        config: config.clone(),
        timings: BTreeMap::new(),
        mass: Vec::new(),
        solver: None,
        convergence: None,
        inequality: None,
        flat: None,
        derivatives: Vec::new(),
        scale: None,
        verdicts: Vec::new(),
    };
    let mut field = None;
    let all = config.kind == ExperimentKind::FullSuite;
    let tol = &config.verdicts;
    let m = metric.as_ref();

    if let (Some(s), true) = (&config.mass, all || config.kind == ExperimentKind::MassStudy) {
        timed(&mut rec, "mass", |rec| mass_stage(rec, m, &config.metric, s, tol));
    }
    if let (Some(s), true) = (&config.solver, all || config.kind == ExperimentKind::SolverConvergence) {
        timed(&mut rec, "solver", |rec| field = solver_stage(rec, m, s, tol));
    }
    if let (Some(s), true) = (&config.inequality, all || config.kind == ExperimentKind::Inequality) {
        timed(&mut rec, "inequality", |rec| {
            inequality_stage(rec, m, &config.metric, s, tol, config.seed)
        });
    }
    if let (Some(s), true) = (&config.derivatives, all || config.kind == ExperimentKind::DerivativeCheck) {
        timed(&mut rec, "derivatives", |rec| derivative_stage(rec, m, s, tol, config.seed))?;
    }
    if let (Some(s), true) = (&config.scale, all || config.kind == ExperimentKind::ScaleCovariance) {
        timed(&mut rec, "scale", |rec| scale_stage(rec, &config.metric, s, tol))?;
    }
    let total = start.elapsed().as_secs_f64();
    rec.timings.insert("total".into(), total);
    if let Some(max) = tol.max_seconds {
        rec.verdicts.push(VerdictRecord::at_most("runtime", total, max, "wall-clock seconds"));
    }
    Ok(RunOutput { record: rec, field })
}

fn timed<T>(rec: &mut RunRecord, stage: &str, f: impl FnOnce(&mut RunRecord) -> T) -> T {
    let t = Instant::now();
    let out = f(rec);
    rec.timings.insert(stage.into(), t.elapsed().as_secs_f64());
    out
}

fn errored(rec: &mut RunRecord, rule: &str, e: impl std::fmt::Display) {
    rec.verdicts.push(VerdictRecord::with_status(rule, Status::Errored, e.to_string()));
}

fn mass_stage(
    rec: &mut RunRecord,
    metric: &dyn MetricField,
    spec: &MetricSpec,
    s: &MassSection,
    tol: &VerdictTolerances,
) {
    let radii = radii_or_default(&s.radii, metric);
    let q = quadrature(s.quadrature);
    let exact = exact_mass(spec);
    let mut reports: Vec<MassReport> = Vec::new();
    for shape in &s.shapes {
        let ex = shape.exhaustion();
        let rule = format!("mass.extrapolation.{}", ex.as_str());
        match mass_study(metric, ex, &radii, q) {
            Ok(r) => {
                rec.verdicts.push(extrapolation_verdict(&rule, &r, exact, tol.mass));
                reports.push(r);
            }
            Err(e) => errored(rec, &rule, e),
        }
    }
    if let Some(h) = reports.iter().find(|r| r.shape == Exhaustion::Hemisphere) {
        if hemisphere_closed_form(spec, 1.0).is_some() {
            let dev = h
                .samples
                .iter()
                .map(|&(r, v)| (v - hemisphere_closed_form(spec, r).unwrap_or(f64::NAN)).abs())
                .fold(0.0f64, f64::max);
            rec.verdicts.push(VerdictRecord::at_most(
                "mass.finite-radius",
                dev,
                tol.finite_radius,
                "max |m(r) - m(1 + m/2r)^3/2| over the hemisphere ladder",
            ));
        }
    }
    for (i, a) in reports.iter().enumerate() {
        for b in &reports[i + 1..] {
            let diff = (a.mass() - b.mass()).abs();
            let (threshold, how) = if tol.exhaustion_within_fit {
                (a.fit.residual + b.fit.residual, "combined fit residuals")
            } else {
                (tol.exhaustion, "fixed tolerance")
            };
            let rule = format!("mass.exhaustion.{}-{}", a.shape.as_str(), b.shape.as_str());
            rec.verdicts.push(VerdictRecord::at_most(
                &rule,
                diff,
                threshold,
                format!("{:.9} vs {:.9}, {how}", a.mass(), b.mass()),
            ));
        }
    }
    rec.mass.extend(reports);
}

fn extrapolation_verdict(rule: &str, r: &MassReport, exact: Option<f64>, tol: f64) -> VerdictRecord {
    if !r.fit.converged {
        return VerdictRecord {
            rule: rule.into(),
            status: Status::Fail,
            value: r.mass(),
            threshold: tol,
            note: "extrapolation did not converge".into(),
        };
    }
    match exact {
        Some(m) => VerdictRecord::at_most(
            rule,
            (r.mass() - m).abs(),
            tol,
            format!("m̂ = {:.9}, exact {m}, fit residual {:.3e}", r.mass(), r.fit.residual),
        ),
        None => VerdictRecord::with_status(rule, Status::Skipped, "no closed-form mass"),
    }
}

fn solver_stage(
    rec: &mut RunRecord,
    metric: &dyn MetricField,
    s: &SolverSection,
    tol: &VerdictTolerances,
) -> Option<DiscreteField> {
    let truncation = s.truncation.truncation();
    let mut rungs = Vec::new();
    let mut finest = None;
    for &nodes in &s.resolutions {
        let rung = (|| -> pmtk_core::Result<(RungRecord, DiscreteField)> {
            let e = evaluate(metric, nodes, truncation, s.tolerance)?;
            let levels = if s.levels.is_empty() {
                interior_levels(&e.field, 5)
            } else {
                s.levels.clone()
            };
            let r = RungRecord {
                nodes,
                unknowns: e.field.domain.n_unknowns,
                iterations: e.field.iterations,
                residual: residual(metric, &e.field)?,
                min_gradient: min_gradient_on_sigma(metric, &e.field)?,
                bulk: e.bulk.value,
                boundary: e.boundary,
                identity: e.identity(),
                coarea: e.coarea(&|_| 1.0)?,
                levels: level_connectedness(&e.field, &levels),
            };
            Ok((r, e.field))
        })();
        match rung {
            Ok((r, f)) => {
                rungs.push(r);
                finest = Some(f);
            }
            Err(e) => {
                errored(rec, "solver", format!("{nodes:?}: {e}"));
                return None;
            }
        }
    }
    let negative_control = finest.as_ref().map(|f| {
        let rho = bowl_radius(&f.domain);
        let bowl = DiscreteField::from_fn(&f.domain, |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        level_connectedness(&bowl, &[rho * rho]).remove(0)
    });

    let col = |f: &dyn Fn(&RungRecord) -> f64| rungs.iter().map(f).collect::<Vec<f64>>();
    let residuals = col(&|r| r.residual);
    let gradients = col(&|r| r.min_gradient);
    let bulk = col(&|r| r.bulk);
    let identity = col(&|r| r.identity.max);
    let mismatch = col(&|r| r.coarea.mismatch);
    rec.convergence = Some(ConvergenceRecord {
        ladder: s
            .resolutions
            .iter()
            .map(|n| format!("{}x{}x{}", n[0], n[1], n[2]))
            .collect(),
        observables: vec![
            observable("residual", Series::Errors, &residuals),
            observable("min_gradient", Series::Values, &gradients),
            observable("bulk", Series::Values, &bulk),
            observable("boundary", Series::Values, &col(&|r| r.boundary)),
            observable("identity_defect", Series::Errors, &identity),
            observable("coarea_mismatch", Series::Errors, &mismatch),
        ],
    });

    let short = |rule: &str, need: usize| {
        VerdictRecord::with_status(rule, Status::Skipped, format!("needs {need} or more rungs"))
    };
    for check in &s.checks {
        let v = match check {
            SolverCheck::ResidualOrder if rungs.len() < 2 => short("solver.residual-order", 2),
            SolverCheck::ResidualOrder => order_verdict(
                "solver.residual-order",
                &residuals,
                tol.residual_order,
                "max interior |Δu| against zero",
            ),
            SolverCheck::MinGradient => {
                let min = gradients.iter().copied().fold(f64::INFINITY, f64::min);
                if !(min > 0.0) {
                    VerdictRecord {
                        rule: "solver.min-gradient".into(),
                        status: Status::Fail,
                        value: min,
                        threshold: 0.0,
                        note: "min |∇u| on Σ is not positive".into(),
                    }
                } else if rungs.len() < 2 {
                    VerdictRecord::at_least("solver.min-gradient", min, f64::MIN_POSITIVE, "min |∇u| on Σ")
                } else {
                    relative_change("solver.min-gradient", &gradients, tol.gradient_stability, "min |∇u| on Σ")
                }
            }
            SolverCheck::IdentityOrder if rungs.len() < 2 => short("identity.order", 2),
            SolverCheck::IdentityOrder => order_verdict(
                "identity.order",
                &identity,
                tol.identity_order,
                "max |∂_ν|∇u| + |∇u| H| on Σ",
            ),
            SolverCheck::Coarea => {
                let last = *mismatch.last().unwrap_or(&f64::NAN);
                let shrinking = mismatch.windows(2).all(|w| w[1] < w[0] || w[1] <= 1e-12);
                let mut v = VerdictRecord::at_most(
                    "coarea.mismatch",
                    last,
                    tol.coarea,
                    format!("isosurface vs cell sum, ladder {}", sci(&mismatch)),
                );
                if !shrinking {
                    v.status = Status::Fail;
                    v.note.push_str("; not shrinking under refinement");
                }
                v
            }
            SolverCheck::Levels => {
                let bad: Vec<String> = rungs
                    .iter()
                    .flat_map(|r| r.levels.iter().map(move |l| (r.nodes, l)))
                    .filter(|(_, l)| !l.is_single_lateral())
                    .map(|(n, l)| format!("{n:?} t={:.4}: {:?}", l.level, l.touches_outer))
                    .collect();
                let total: usize = rungs.iter().map(|r| r.levels.len()).sum();
                VerdictRecord::at_most(
                    "levels.connected",
                    bad.len() as f64,
                    0.0,
                    if bad.is_empty() {
                        format!("{total} levels, each one component meeting the truncation surface")
                    } else {
                        bad.join("; ")
                    },
                )
            }
            SolverCheck::NegativeControl => match &negative_control {
                Some(l) => {
                    let inner = l.touches_outer.iter().filter(|t| !**t).count();
                    VerdictRecord::at_least(
                        "levels.negative-control",
                        inner as f64,
                        1.0,
                        format!("|x|² at t = {:.4}: {:?}", l.level, l.touches_outer),
                    )
                }
                None => short("levels.negative-control", 1),
            },
            SolverCheck::BulkStability if rungs.len() < 2 => short("bulk.stability", 2),
            SolverCheck::BulkStability => {
                relative_change("bulk.stability", &bulk, tol.bulk_stability, "bulk integral")
            }
        };
        rec.verdicts.push(v);
    }
    rec.solver = Some(SolverRecord {
        rungs,
        negative_control,
    });
    if s.dump {
        finest
    } else {
        None
    }
}

/// Radius of a sphere about the origin inside the domain, away from both
/// the horizon and the truncation surface.
fn bowl_radius(d: &Domain) -> f64 {
    match d.truncation {
        Truncation::Shell { r_out } => {
            let r_in = d.positions.iter().map(|x| norm(*x)).fold(f64::INFINITY, f64::min);
            (r_in * r_out).sqrt()
        }
        Truncation::Box {
            half_width, height, ..
        } => 0.5 * half_width.min(height),
    }
}

fn norm(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn observable(name: &str, series: Series, values: &[f64]) -> Observable {
    Observable {
        name: name.into(),
        series,
        values: values.to_vec(),
    }
}

fn order_verdict(rule: &str, errors: &[f64], min: f64, what: &str) -> VerdictRecord {
    let orders = orders_from_errors(errors);
    let worst = orders.iter().map(|o| o.value()).fold(f64::INFINITY, f64::min);
    let pass = orders.iter().all(|o| o.at_least(min));
    VerdictRecord {
        rule: rule.into(),
        status: if pass { Status::Pass } else { Status::Fail },
        value: worst,
        threshold: min,
        note: format!("{what}: {}, orders {}", sci(errors), render_orders(&orders)),
    }
}

pub fn render_order(o: Order) -> String {
    match o {
        Order::Exact => "exact".into(),
        Order::Observed(p) => format!("{p:.3}"),
        Order::NonMonotone => "nan (non-monotone)".into(),
    }
}

fn render_orders(orders: &[Order]) -> String {
    orders.iter().map(|o| render_order(*o)).collect::<Vec<_>>().join(", ")
}

fn sci(xs: &[f64]) -> String {
    let v: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", v.join(", "))
}

fn relative_change(rule: &str, values: &[f64], max: f64, what: &str) -> VerdictRecord {
    let n = values.len();
    let (a, b) = (values[n - 2], values[n - 1]);
    let change = if a == b { 0.0 } else { (b - a).abs() / b.abs().max(a.abs()) };
    VerdictRecord::at_most(
        rule,
        change,
        max,
        format!("{what} on the two finest rungs: {a:.6e}, {b:.6e}"),
    )
}

fn inequality_stage(
    rec: &mut RunRecord,
    metric: &dyn MetricField,
    spec: &MetricSpec,
    s: &InequalitySection,
    tol: &VerdictTolerances,
    seed: u64,
) {
    let config = InequalityConfig {
        nodes: s.nodes,
        truncation: s.truncation.truncation(),
        solver_tol: s.tolerance,
        radii: radii_or_default(&s.radii, metric),
        quadrature: quadrature(s.quadrature),
        energy_samples: s.energy_samples,
        seed,
    };
    let report = match check_inequality(metric, &config) {
        Ok(r) => r,
        Err(e) => return errored(rec, "inequality.estimate", e),
    };
    let m = report.mass.mass();
    let t = report.tolerance.total;
    let note = format!(
        "m̂ = {m:.6}, B = {:.6}, S = {:.3e}, slack = {:.6}, tol_total = {t:.3e}",
        report.bulk.value, report.boundary, report.slack
    );
    let status = match report.verdict {
        Verdict::Pass => Status::Pass,
        Verdict::Fail => Status::Fail,
        Verdict::Skipped => Status::Skipped,
    };
    let note = if status == Status::Skipped {
        format!(
            "sampled energy conditions fail (min R = {:.3e}, min H = {:.3e}); {note}",
            report.energy.min_scalar, report.energy.min_mean
        )
    } else {
        note
    };
    rec.verdicts.push(VerdictRecord {
        rule: "inequality.estimate".into(),
        status,
        value: report.slack,
        threshold: -t,
        note,
    });
    rec.verdicts.push(if status == Status::Skipped {
        VerdictRecord::with_status("inequality.tolerance", Status::Skipped, "estimate skipped")
    } else if m > tol.flat_mass {
        VerdictRecord::at_most(
            "inequality.tolerance",
            t / m,
            tol.tolerance_fraction,
            format!("tol_total / m̂ (fit {:.3e}, refinement {:.3e}, truncation {:.3e})",
                report.tolerance.fit, report.tolerance.refinement, report.tolerance.truncation),
        )
    } else {
        VerdictRecord::at_most("inequality.tolerance", t, tol.flat_mass, "tol_total with vanishing mass")
    });

    if spec.family == Family::Flat {
        rec.verdicts.push(VerdictRecord::at_most("rigidity.mass", m.abs(), tol.flat_mass, "|m̂|"));
        rec.verdicts.push(VerdictRecord::at_most(
            "rigidity.bulk",
            report.bulk.value.abs(),
            tol.flat_integral,
            "|B|",
        ));
        rec.verdicts.push(VerdictRecord::at_most(
            "rigidity.boundary",
            report.boundary.abs(),
            tol.flat_integral,
            "|S|",
        ));
        let dev = (|| -> pmtk_core::Result<f64> {
            let d = build_domain(metric, s.nodes, config.truncation)?;
            let u = solve(&assemble(metric, &d)?, s.tolerance)?;
            Ok((0..d.len())
                .filter(|&p| d.tags[p].is_active())
                .map(|p| (u.values[p] - d.positions[p][2]).abs())
                .fold(0.0f64, f64::max))
        })();
        match dev {
            Ok(dev) => {
                rec.verdicts.push(VerdictRecord::at_most("rigidity.field", dev, tol.flat_field, "max |u - x3|"));
                rec.flat = Some(FlatRecord { field_deviation: dev });
            }
            Err(e) => errored(rec, "rigidity.field", e),
        }
    }
    rec.inequality = Some(report);
}

fn derivative_stage(
    rec: &mut RunRecord,
    metric: &dyn MetricField,
    s: &DerivativeSection,
    tol: &VerdictTolerances,
    seed: u64,
) -> Result<()> {
    let config = DerivativeCheckConfig {
        points: s.points,
        extent: s.extent,
        step: s.step,
        margin: s.margin,
        seed,
    };
    let mut metrics: Vec<Box<dyn MetricField>> = Vec::new();
    for m in &s.also {
        metrics.push(build_metric(m)?);
    }
    let all = std::iter::once(metric).chain(metrics.iter().map(|m| m.as_ref()));
    for g in all {
        let name = g.name();
        match derivative_check(g, &config) {
            Ok(r) => {
                let orders = [r.first_order, r.second_order];
                let worst = orders.iter().map(|o| o.value()).fold(f64::INFINITY, f64::min);
                rec.verdicts.push(VerdictRecord {
                    rule: format!("derivatives.order[{name}]"),
                    status: if orders.iter().all(|o| o.at_least(tol.derivative_order)) {
                        Status::Pass
                    } else {
                        Status::Fail
                    },
                    value: worst,
                    threshold: tol.derivative_order,
                    note: format!(
                        "{} points, ∂g orders {}, ∂²g orders {}",
                        r.points,
                        render_order(r.first_order),
                        render_order(r.second_order)
                    ),
                });
                let defect = r
                    .trace_defect
                    .max(r.gradient_defect)
                    .max(r.hessian_asymmetry)
                    .max(r.inverse_defect);
                rec.verdicts.push(VerdictRecord::at_most(
                    &format!("derivatives.identity[{name}]"),
                    defect,
                    tol.derivative_defect,
                    format!(
                        "trace {:.1e}, gradient {:.1e}, asymmetry {:.1e}, inverse {:.1e}",
                        r.trace_defect, r.gradient_defect, r.hessian_asymmetry, r.inverse_defect
                    ),
                ));
                rec.derivatives.push(DerivativeRecord { metric: name, report: r });
            }
            Err(e) => errored(rec, &format!("derivatives.order[{name}]"), e),
        }
    }
    Ok(())
}

fn scale_stage(rec: &mut RunRecord, spec: &MetricSpec, s: &ScaleSection, tol: &VerdictTolerances) -> Result<()> {
    let base = build_metric(spec)?;
    let mut scaled_spec = spec.clone();
    scaled_spec.scale = Some(spec.scale.unwrap_or(1.0) * s.factor);
    let scaled = build_metric(&scaled_spec)?;
    let radii = radii_or_default(&s.radii, base.as_ref());
    let scaled_radii: Vec<f64> = radii.iter().map(|r| r * s.factor).collect();
    let q = quadrature(s.quadrature);
    let out = (|| -> pmtk_core::Result<ScaleRecord> {
        let m0 = mass_study(base.as_ref(), Exhaustion::Hemisphere, &radii, q)?;
        let m1 = mass_study(scaled.as_ref(), Exhaustion::Hemisphere, &scaled_radii, q)?;
        let e0 = evaluate(base.as_ref(), s.nodes, s.truncation.truncation(), s.tolerance)?;
        let e1 = evaluate(
            scaled.as_ref(),
            s.nodes,
            s.truncation.scaled(s.factor).truncation(),
            s.tolerance,
        )?;
        Ok(ScaleRecord {
            factor: s.factor,
            mass: [m0, m1],
            rhs: [e0.rhs(), e1.rhs()],
            bulk: [e0.bulk.value, e1.bulk.value],
            boundary: [e0.boundary, e1.boundary],
        })
    })();
    let r = match out {
        Ok(r) => r,
        Err(e) => {
            errored(rec, "scale.mass", e);
            return Ok(());
        }
    };
    let l = s.factor;
    let (m0, m1) = (r.mass[0].mass(), r.mass[1].mass());
    rec.verdicts.push(VerdictRecord::at_most(
        "scale.mass",
        (m1 - l * m0).abs(),
        tol.scale_mass,
        format!("m̂ = {m0:.9}, m̂(λ) = {m1:.9}, λ = {l}"),
    ));
    let (b0, b1) = (r.rhs[0], r.rhs[1]);
    let dev = if b0 == 0.0 && b1 == 0.0 {
        0.0
    } else {
        (b1 - l * b0).abs() / (l * b0).abs()
    };
    rec.verdicts.push(VerdictRecord::at_most(
        "scale.rhs",
        dev,
        tol.scale_rhs,
        format!("B + S = {b0:.6}, (B + S)(λ) = {b1:.6}"),
    ));
    rec.scale = Some(r);
    Ok(())
}
