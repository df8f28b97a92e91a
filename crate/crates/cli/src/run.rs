use bessel_core::certify::{certify_bessel_pair, CertifyProblem, Verdict};
use bessel_core::fd;
use bessel_core::geometry::{
    gram_check, horizontal_gradient_fd, min_eigenvalue, psi_closed, quasi_norm, symmetry_defect,
    Geometry,
};
use bessel_core::hardy::{
    best_constant_search, hardy_group, hardy_radial_on, mc_radial_consistency, ratio_sweep, McSpec,
};
use bessel_core::ode::{solve_radial_with, verify_ode_residual, OdeOptions};
use bessel_core::picone::{random_first_order_sweep, random_second_order_sweep};
use bessel_core::rellich::{
    extremal_exponent, geometric_radii, okazawa_constant, rellich_check,
    rellich_classical_constant, rellich_constant, rellich_hypothesis_check,
};
use bessel_core::weight::WeightFn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::spec::*;
use crate::{Report, RunSpec, Status, TOOL, VERSION};

type Outcome = Result<(Status, Value, Vec<String>), String>;

fn weight(text: &str) -> Result<WeightFn, String> {
    WeightFn::parse(text).map_err(|e| format!("weight `{text}`: {e}"))
}

fn declared(text: &str, decay: Option<f64>) -> Result<WeightFn, String> {
    WeightFn::new(text, 0.0, f64::INFINITY, decay).map_err(|e| format!("weight `{text}`: {e}"))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn holds(status: bool) -> Status {
    if status {
        Status::Ok
    } else {
        Status::Negative
    }
}

/// Executes a parsed spec. Module failures become an error report.
pub fn run(spec: &RunSpec) -> Report {
    let outcome = match spec {
        RunSpec::Certify(s) => certify(s),
        RunSpec::Ode(s) => ode(s),
        RunSpec::Picone(s) => picone(s),
        RunSpec::Hardy(s) => hardy(s),
        RunSpec::Rellich(s) => rellich(s),
        RunSpec::GeometryCheck(s) => geometry_check(s),
    };
    let (status, result, error, warnings) = match outcome {
        Ok((status, result, warnings)) => (status, Some(result), None, warnings),
        Err(e) => (Status::Error, None, Some(e), Vec::new()),
    };
    Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        command: spec.command(),
        status,
        spec: spec.echo(),
        result,
        error,
        warnings,
    }
}

fn certify(s: &CertifySpec) -> Outcome {
    let problem = CertifyProblem {
        w: declared(&s.w, s.w_decay)?,
        h: declared(&s.h, s.h_decay)?,
        p: s.p,
        q: s.q,
        r0: s.r0,
        tol: s.tol,
    };
    let cert = certify_bessel_pair(&problem).map_err(|e| e.to_string())?;
    let mut warnings = Vec::new();
    if cert.inconclusive {
        warnings.push("criterion integral lies within its error budget of the bound".into());
    }
    if !cert.certified_tail {
        warnings.push("tail bounds use probed decay exponents".into());
    }
    let status = holds(cert.verdict == Verdict::Certified);
    Ok((status, json!({ "certificate": to_value(&cert) }), warnings))
}

fn ode(s: &OdeSpec) -> Outcome {
    let (w, h) = (weight(&s.w)?, weight(&s.h)?);
    let opts = OdeOptions {
        stop_at_zero: s.stop_at_zero,
        ..OdeOptions::with_tol(s.tol)
    };
    let sol = solve_radial_with(&w, &h, s.p, s.q, s.r0, s.r1, s.v0, s.dv0, &opts)
        .map_err(|e| e.to_string())?;
    let residual = verify_ode_residual(&sol, &w, &h, s.p, s.q).ok();
    let mut warnings = Vec::new();
    match residual {
        Some(r) if r > 1e-6 => warnings.push(format!("ODE residual {r:e} exceeds 1e-6")),
        None => warnings.push("too few nodes for a residual check".into()),
        _ => {}
    }
    let result = json!({
        "positive": sol.positive,
        "first_zero": sol.first_zero,
        "nodes": sol.grid.len(),
        "r_end": sol.grid.last(),
        "v_end": sol.v.last(),
        "residual": residual,
        "step_stats": to_value(&sol.step_stats),
        "solution": {
            "r": sol.grid,
            "v": sol.v,
            "v_prime": sol.v_prime,
            "flux": sol.flux,
        },
    });
    Ok((holds(sol.positive), result, warnings))
}

fn picone(s: &PiconeSpec) -> Outcome {
    if s.samples == 0 {
        return Err("samples must be positive".into());
    }
    let (summary, identity_tol) = match s.order {
        1 => (
            random_first_order_sweep(&s.geometry, s.p, s.samples, s.seed, s.complex, s.tolerance),
            1e-6,
        ),
        2 => {
            let Geometry::Euclidean { n } = s.geometry else {
                return Err(format!(
                    "second-order identities need a euclidean geometry, got {}",
                    s.geometry
                ));
            };
            if s.complex {
                return Err("second-order sweeps use real test functions".into());
            }
            (
                random_second_order_sweep(n, s.p, s.samples, s.seed, s.tolerance),
                1e-5,
            )
        }
        o => return Err(format!("order must be 1 or 2, got {o}")),
    };
    let mut warnings = Vec::new();
    if summary.skipped > 0 {
        warnings.push(format!(
            "{} samples skipped: |u| not smooth across the stencil",
            summary.skipped
        ));
    }
    if !summary.errors.is_empty() {
        warnings.push(format!(
            "{} samples failed to evaluate",
            summary.errors.len()
        ));
    }
    let identity = summary.max_rel_diff <= identity_tol;
    let nonnegative = summary.violations.is_empty();
    let status = holds(identity && nonnegative && summary.errors.is_empty());
    let result = json!({
        "summary": to_value(&summary),
        "identity_tolerance": identity_tol,
        "identity_holds": identity,
        "nonnegative": nonnegative,
    });
    Ok((status, result, warnings))
}

fn hardy(s: &HardySpec) -> Outcome {
    match s {
        HardySpec::Radial(s) => {
            let rep = hardy_radial_on(
                s.q,
                s.p,
                &weight(&s.w)?,
                &weight(&s.h)?,
                &s.profile,
                s.tol,
                s.r_in,
            )
            .map_err(|e| e.to_string())?;
            Ok((
                holds(rep.holds_within(3.0)),
                json!({ "report": to_value(&rep) }),
                rep.notes.clone(),
            ))
        }
        HardySpec::Group(s) => {
            let rep = hardy_group(
                &s.geometry,
                &weight(&s.w)?,
                &weight(&s.h)?,
                s.p,
                &s.profile,
                &mc_spec(s),
            )
            .map_err(|e| e.to_string())?;
            Ok((
                holds(rep.holds_within(3.0)),
                json!({ "report": to_value(&rep) }),
                rep.notes.clone(),
            ))
        }
        HardySpec::Consistency(s) => {
            let c = mc_radial_consistency(
                &s.geometry,
                &weight(&s.w)?,
                &weight(&s.h)?,
                s.p,
                &s.profile,
                &mc_spec(s),
                s.tol,
            )
            .map_err(|e| e.to_string())?;
            Ok((
                holds(c.within),
                json!({ "consistency": to_value(&c) }),
                Vec::new(),
            ))
        }
        HardySpec::Search(s) => {
            let bounds = s
                .bounds
                .clone()
                .unwrap_or_else(|| s.family.default_bounds());
            let best = best_constant_search(
                s.q,
                s.p,
                &weight(&s.w)?,
                &weight(&s.h)?,
                s.family,
                &bounds,
                s.radius,
                s.tol,
            )
            .map_err(|e| e.to_string())?;
            let mut warnings = Vec::new();
            if best.stagnated {
                warnings.push("no simplex restart met the convergence test".into());
            }
            Ok((
                Status::Ok,
                json!({ "best_constant": to_value(&best) }),
                warnings,
            ))
        }
        HardySpec::Sweep(s) => {
            if s.family.dimension() != 1 {
                return Err(format!(
                    "sweeps need a one-parameter family, got {:?}",
                    s.family
                ));
            }
            let profiles: Vec<_> = s
                .values
                .iter()
                .map(|&v| (v, s.family.profile(&[v], s.q, s.p, s.radius)))
                .collect();
            let points = ratio_sweep(s.q, s.p, &weight(&s.w)?, &weight(&s.h)?, &profiles, s.tol)
                .map_err(|e| e.to_string())?;
            Ok((
                Status::Ok,
                json!({ "sweep": to_value(&points) }),
                Vec::new(),
            ))
        }
    }
}

fn mc_spec(s: &HardyGroupSpec) -> McSpec {
    McSpec {
        sensitivity: s.sensitivity,
        ..McSpec::new(s.box_half_width, s.exclusion, s.samples, s.seed)
    }
}

fn rellich(s: &RellichSpec) -> Outcome {
    match s {
        RellichSpec::Constant(s) => {
            let c = rellich_constant(s.n, s.p, s.gamma).map_err(|e| e.to_string())?;
            let classical = if s.p == 2.0 && s.gamma == 0.0 {
                rellich_classical_constant(s.n).ok()
            } else {
                None
            };
            let okazawa = if s.gamma == 0.0 {
                okazawa_constant(s.n, s.p).ok()
            } else {
                None
            };
            let result = json!({
                "constant": c,
                "classical": classical,
                "okazawa": okazawa,
                "extremal_exponent": extremal_exponent(s.n, s.p, s.gamma),
            });
            Ok((Status::Ok, result, Vec::new()))
        }
        RellichSpec::Hypothesis(s) => {
            let r = &s.radii;
            if !(r.from > 0.0 && r.to >= r.from) || r.count == 0 {
                return Err(format!(
                    "radii need 0 < from <= to and count > 0, got {r:?}"
                ));
            }
            let radii = geometric_radii(r.from, r.to, r.count);
            let rep = rellich_hypothesis_check(
                &weight(&s.w)?,
                &weight(&s.v)?,
                &weight(&s.h)?,
                s.p,
                s.n,
                &radii,
                s.tol,
            )
            .map_err(|e| e.to_string())?;
            let mut warnings = Vec::new();
            if !rep.violations.is_empty() {
                warnings.push(format!("-Δv <= 0 at {} radii", rep.violations.len()));
            }
            Ok((
                holds(rep.holds),
                json!({ "hypothesis": to_value(&rep) }),
                warnings,
            ))
        }
        RellichSpec::Check(s) => {
            let rep = rellich_check(
                &weight(&s.w)?,
                &weight(&s.h)?,
                s.p,
                s.n,
                &s.profile,
                s.tol,
                s.r_in,
            )
            .map_err(|e| e.to_string())?;
            Ok((
                holds(rep.holds_within(3.0)),
                json!({ "report": to_value(&rep) }),
                rep.notes.clone(),
            ))
        }
    }
}

fn geometry_check(s: &GeometryCheckSpec) -> Outcome {
    let g = s.geometry;
    let dim = g.ambient_dim();
    if s.points == 0 || !(s.half_width > 0.0) {
        return Err("need points > 0 and half_width > 0".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let points: Vec<Vec<f64>> = (0..s.points)
        .map(|_| {
            (0..dim)
                .map(|_| rng.gen_range(-s.half_width..s.half_width))
                .collect()
        })
        .collect();
    let mut gram_max = 0.0f64;
    let mut symmetry_max = 0.0f64;
    let mut min_eig_rel = f64::INFINITY;
    for x in &points {
        gram_max = gram_max.max(gram_check(&g, x));
        symmetry_max = symmetry_max.max(symmetry_defect(&g, x));
        let scale = g.a_matrix(x).abs().max().max(1.0);
        min_eig_rel = min_eig_rel.min(min_eigenvalue(&g, x) / scale);
    }
    let mut passed = gram_max <= 1e-12 && symmetry_max <= 1e-12 && min_eig_rel >= -1e-12;
    let mut result = json!({
        "geometry": g.to_string(),
        "ambient_dim": dim,
        "homogeneous_dim": g.homogeneous_dim(),
        "gauge_available": g.has_gauge(),
        "gram_max": gram_max,
        "symmetry_max": symmetry_max,
        "min_eigenvalue_rel": min_eig_rel,
    });
    let mut warnings = Vec::new();
    if g.has_gauge() {
        let d = |y: &[f64]| quasi_norm(&g, y).unwrap_or(f64::NAN);
        let mut psi_fd_max_rel = 0.0f64;
        let mut psi_points = 0usize;
        let mut homogeneity_max_rel = 0.0f64;
        let mut psi_invariance_max = 0.0f64;
        for x in &points {
            let dx = d(x);
            let psi = psi_closed(&g, x).map_err(|e| e.to_string())?;
            for &lambda in &s.lambdas {
                let y = g.dilate(x, lambda);
                homogeneity_max_rel = homogeneity_max_rel
                    .max((d(&y) - lambda * dx).abs() / (lambda * dx).max(1e-300));
                let py = psi_closed(&g, &y).map_err(|e| e.to_string())?;
                psi_invariance_max = psi_invariance_max.max((py - psi).abs());
            }
            if dx >= s.min_gauge {
                let xd = horizontal_gradient_fd(&g, &d, x, fd::first_order_step(x))
                    .map_err(|e| e.to_string())?;
                let fd_psi: f64 = xd.iter().map(|v| v * v).sum();
                psi_fd_max_rel = psi_fd_max_rel.max((fd_psi - psi).abs() / psi.max(1e-3));
                psi_points += 1;
            }
        }
        passed &=
            psi_fd_max_rel <= 1e-6 && homogeneity_max_rel <= 1e-12 && psi_invariance_max <= 1e-10;
        let obj = result.as_object_mut().expect("object");
        obj.insert("psi_fd_max_rel".into(), json!(psi_fd_max_rel));
        obj.insert("psi_points".into(), json!(psi_points));
        obj.insert("homogeneity_max_rel".into(), json!(homogeneity_max_rel));
        obj.insert("psi_invariance_max".into(), json!(psi_invariance_max));
    } else {
        warnings.push(format!(
            "{g} has no closed-form gauge; gauge checks skipped"
        ));
    }
    result
        .as_object_mut()
        .expect("object")
        .insert("passed".into(), json!(passed));
    Ok((holds(passed), result, warnings))
}
