//! Integral criteria for Bessel pairs.
//!
//! For `b(s) > 0` with `∫ b < ∞` put `φ(r) = 2 ∫_r^∞ b(s) ds`. A pair `(a, b)`
//! is certified at `r0` when
//! `∫_{r0}^∞ (φ(s)/a(s))^{1/(p-1)} ds <= 1/(2(p-1))`. The weighted form uses
//! `a(s) = s^{Q-1} W(s)` and `b(s) = s^{Q-1} H(s)`.
//!
//! `φ` is tabulated on a geometric grid by cumulative quadrature from the
//! top of the grid downward and interpolated monotonically in
//! `(log r, log φ)`. The error budget collects the quadrature estimates, the
//! tail truncation bound, the difference against a half-resolution grid and
//! the propagated error in `φ`.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interp::Pchip;
use crate::quadrature::{
    geometric_breakpoints, integrate_partition, integrate_tail, power_tail_radius, QuadError,
    QuadOptions, TailDecay,
};
use crate::weight::{probe_decay, Decay, WeightError, WeightFn};

pub const NODES_PER_DECADE: usize = 512;
pub const GRID_DECADES: f64 = 6.0;
const MIN_NODES: usize = 64;
const PHI_REL_TOL: f64 = 1e-13;
const MAX_PHI_SAMPLES: usize = 257;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error("{which}({s}) = {value} is not strictly positive")]
    NotPositive { which: String, s: f64, value: f64 },
    #[error("{which}({s}) is not finite")]
    NonFinite { which: String, s: f64 },
    #[error("the integral defining φ diverges (tail exponent {exponent})")]
    PhiDivergent { exponent: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "certified")]
    Certified,
    #[serde(rename = "not-certified")]
    NotCertified,
    #[serde(rename = "divergent-2.9")]
    Divergent29,
}

/// Weighted problem `(W, H, p, Q, r0)`.
#[derive(Debug, Clone)]
pub struct CertifyProblem {
    pub w: WeightFn,
    pub h: WeightFn,
    pub p: f64,
    pub q: f64,
    pub r0: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub quadrature: f64,
    pub tail: f64,
    pub interpolation: f64,
    pub phi_propagation: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.quadrature + self.tail + self.interpolation + self.phi_propagation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub p: f64,
    pub r0: f64,
    pub bound: f64,
    pub phi_at_r0: Option<f64>,
    pub criterion_integral: Option<f64>,
    pub error_budget: Option<f64>,
    pub budget: Option<ErrorBudget>,
    /// Tail bounds rest on declared decay exponents rather than probes.
    pub certified_tail: bool,
    pub inconclusive: bool,
    pub a_decay: Decay,
    pub b_decay: Decay,
    pub truncation_radius: Option<f64>,
    pub grid_nodes: usize,
    pub notes: Vec<String>,
    /// Decimated `(r, φ(r))` table.
    pub phi_samples: Vec<[f64; 2]>,
}

impl Certificate {
    fn empty(p: f64, r0: f64, a_decay: Decay, b_decay: Decay) -> Self {
        Certificate {
            verdict: Verdict::NotCertified,
            p,
            r0,
            bound: 1.0 / (2.0 * (p - 1.0)),
            phi_at_r0: None,
            criterion_integral: None,
            error_budget: None,
            budget: None,
            certified_tail: a_decay.is_declared() && b_decay.is_declared(),
            inconclusive: false,
            a_decay,
            b_decay,
            truncation_radius: None,
            grid_nodes: 0,
            notes: Vec::new(),
            phi_samples: Vec::new(),
        }
    }
}

type Func<'a> = &'a dyn Fn(f64) -> Result<f64, CertifyError>;

/// Runs `body` with an `f64`-valued view of `f`; the first evaluation error
/// takes precedence over whatever the quadrature reports.
fn with_trap<T>(
    f: Func<'_>,
    body: impl FnOnce(&mut dyn FnMut(f64) -> f64) -> Result<T, QuadError>,
) -> Result<T, CertifyError> {
    let trap: RefCell<Option<CertifyError>> = RefCell::new(None);
    let mut g = |s: f64| match f(s) {
        Ok(v) => v,
        Err(e) => {
            trap.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let out = body(&mut g);
    if let Some(e) = trap.into_inner() {
        return Err(e);
    }
    out.map_err(CertifyError::from)
}

fn tail_kind(decay: &Decay) -> Result<TailDecay, f64> {
    match decay.exponent() {
        Some(e) if e < -1.0 => Ok(TailDecay::Power(e)),
        Some(e) => Err(e),
        None => Ok(TailDecay::Unknown),
    }
}

/// `φ(r)` with a relative accuracy target; returns `(value, abs_error)`.
fn phi_direct(b: Func<'_>, b_decay: &Decay, r: f64, rel: f64) -> Result<(f64, f64), CertifyError> {
    let kind = tail_kind(b_decay).map_err(|exponent| CertifyError::PhiDivergent { exponent })?;
    let scale = b(r)?.abs() * r;
    let tol = (rel * scale).max(f64::MIN_POSITIVE);
    let res = with_trap(b, |g| integrate_tail(g, r, kind, tol)).map_err(|e| match e {
        CertifyError::Quadrature(QuadError::Divergent { exponent }) => {
            CertifyError::PhiDivergent { exponent }
        }
        CertifyError::Quadrature(QuadError::TailNonConvergence { .. }) => {
            CertifyError::PhiDivergent { exponent: f64::NAN }
        }
        e => e,
    })?;
    Ok((2.0 * res.value, 2.0 * res.abs_error_estimate))
}

/// `φ(r) = 2 ∫_r^∞ s^{Q-1} H(s) ds` to absolute tolerance `tol`.
pub fn phi(h: &WeightFn, q: f64, r: f64, tol: f64) -> Result<f64, CertifyError> {
    if !(r > 0.0) || !(tol > 0.0) {
        return Err(CertifyError::InvalidProblem(format!(
            "r = {r}, tol = {tol}"
        )));
    }
    let b = |s: f64| -> Result<f64, CertifyError> { Ok(s.powf(q - 1.0) * h.eval_raw(s)?) };
    let kind = tail_kind(&h.decay().shifted(q - 1.0))
        .map_err(|exponent| CertifyError::PhiDivergent { exponent })?;
    let res = with_trap(&b, |g| integrate_tail(g, r, kind, tol / 2.0)).map_err(|e| match e {
        CertifyError::Quadrature(QuadError::Divergent { exponent }) => {
            CertifyError::PhiDivergent { exponent }
        }
        CertifyError::Quadrature(QuadError::TailNonConvergence { .. }) => {
            CertifyError::PhiDivergent { exponent: f64::NAN }
        }
        e => e,
    })?;
    Ok(2.0 * res.value)
}

fn checked<'a>(
    which: &'static str,
    f: &'a dyn Fn(f64) -> f64,
) -> impl Fn(f64) -> Result<f64, CertifyError> + 'a {
    move |s| {
        let v = f(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CertifyError::NonFinite {
                which: which.into(),
                s,
            })
        }
    }
}

/// Weighted criterion with `a = s^{Q-1} W`, `b = s^{Q-1} H`.
pub fn certify_bessel_pair(problem: &CertifyProblem) -> Result<Certificate, CertifyError> {
    let CertifyProblem {
        w,
        h,
        p,
        q,
        r0,
        tol,
    } = problem;
    let (p, q) = (*p, *q);
    if !(q > 1.0) || !(p > 1.0 && p < q) {
        return Err(CertifyError::InvalidProblem(format!(
            "need 1 < p < Q, got p = {p}, Q = {q}"
        )));
    }
    let a = |s: f64| -> Result<f64, CertifyError> { Ok(s.powf(q - 1.0) * w.eval_raw(s)?) };
    let b = |s: f64| -> Result<f64, CertifyError> { Ok(s.powf(q - 1.0) * h.eval_raw(s)?) };
    let a_decay = w.decay().shifted(q - 1.0);
    let b_decay = h.decay().shifted(q - 1.0);
    certify_core(&a, &b, a_decay, b_decay, p, *r0, *tol)
}

/// Criterion for arbitrary `a, b > 0` on `[r0, ∞)`; tail exponents are probed.
pub fn certify_general(
    a: &dyn Fn(f64) -> f64,
    b: &dyn Fn(f64) -> f64,
    p: f64,
    r0: f64,
    tol: f64,
) -> Result<Certificate, CertifyError> {
    let scale = r0.max(1.0);
    let a_decay = probe_decay(a, scale);
    let b_decay = probe_decay(b, scale);
    let ca = checked("a", a);
    let cb = checked("b", b);
    certify_core(&ca, &cb, a_decay, b_decay, p, r0, tol)
}

fn positive(which: &str, s: f64, v: f64) -> Result<f64, CertifyError> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(CertifyError::NotPositive {
            which: which.into(),
            s,
            value: v,
        })
    }
}

fn certify_core(
    a: Func<'_>,
    b: Func<'_>,
    a_decay: Decay,
    b_decay: Decay,
    p: f64,
    r0: f64,
    tol: f64,
) -> Result<Certificate, CertifyError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(CertifyError::InvalidProblem(format!("p = {p}")));
    }
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(CertifyError::InvalidProblem(format!("r0 = {r0}")));
    }
    if !(tol > 0.0) {
        return Err(CertifyError::InvalidProblem(format!("tol = {tol}")));
    }
    let mut cert = Certificate::empty(p, r0, a_decay, b_decay);
    positive("a", r0, a(r0)?)?;
    positive("b", r0, b(r0)?)?;
    let expo = 1.0 / (p - 1.0);

    let (phi0, _) = match phi_direct(b, &b_decay, r0, PHI_REL_TOL) {
        Ok(v) => v,
        Err(CertifyError::PhiDivergent { exponent }) => {
            cert.verdict = Verdict::Divergent29;
            cert.notes.push(if exponent.is_nan() {
                "∫ b does not converge".to_string()
            } else {
                format!("b(s) decays like s^{exponent}, so ∫ b diverges")
            });
            return Ok(cert);
        }
        Err(e) => return Err(e),
    };
    cert.phi_at_r0 = Some(phi0);

    let g_direct = |s: f64| -> Result<f64, CertifyError> {
        let (ph, _) = phi_direct(b, &b_decay, s, PHI_REL_TOL)?;
        let av = positive("a", s, a(s)?)?;
        Ok((ph / av).powf(expo))
    };

    let g_kind = match (a_decay.exponent(), b_decay.exponent()) {
        (Some(ea), Some(eb)) => {
            let eg = (eb + 1.0 - ea) * expo;
            if eg >= -1.0 {
                cert.notes.push(format!(
                    "the criterion integrand decays like s^{eg}; the integral diverges"
                ));
                return Ok(cert);
            }
            TailDecay::Power(eg)
        }
        _ => TailDecay::Unknown,
    };

    let (r_top, tail_bound) = match g_kind {
        TailDecay::Power(eg) => with_trap(&g_direct, |g| power_tail_radius(g, r0, eg, tol / 4.0))?,
        TailDecay::Unknown => {
            cert.notes
                .push("tail exponent unavailable; truncation radius found by doubling".into());
            let mut r = 2.0 * r0;
            let mut found = None;
            for _ in 0..64 {
                let v = g_direct(r)?;
                if v * r <= tol / 8.0 {
                    found = Some((r, v * r));
                    break;
                }
                r *= 2.0;
            }
            match found {
                Some(x) => x,
                None => {
                    cert.notes.push("criterion tail did not settle".into());
                    return Ok(cert);
                }
            }
        }
    };
    cert.truncation_radius = Some(r_top);

    // φ on the grid, accumulated downward.
    let r_grid = r_top.min(r0 * 10f64.powf(GRID_DECADES));
    let decades = (r_grid / r0).log10();
    let n = ((NODES_PER_DECADE as f64 * decades).ceil() as usize).max(MIN_NODES);
    let nodes: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                r_grid
            } else {
                r0 * (r_grid / r0).powf(i as f64 / n as f64)
            }
        })
        .collect();
    let mut phis = vec![0.0; n + 1];
    let mut errs = vec![0.0; n + 1];
    let (top, top_err) = phi_direct(b, &b_decay, r_grid, PHI_REL_TOL)?;
    phis[n] = top;
    errs[n] = top_err;
    let seg_opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: PHI_REL_TOL,
        max_evaluations: 20_000,
    };
    for i in (0..n).rev() {
        let seg = with_trap(b, |g| {
            integrate_partition(g, &[nodes[i], nodes[i + 1]], &seg_opts)
        })?;
        phis[i] = phis[i + 1] + 2.0 * seg.value;
        errs[i] = errs[i + 1] + 2.0 * seg.abs_error_estimate;
        positive("b", nodes[i], b(nodes[i])?)?;
        positive("a", nodes[i], a(nodes[i])?)?;
    }
    let max_rel_phi = phis
        .iter()
        .zip(&errs)
        .map(|(v, e)| e / v)
        .fold(0.0f64, f64::max);
    if phis.iter().any(|v| !(*v > 0.0)) {
        return Err(CertifyError::NotPositive {
            which: "φ".into(),
            s: r0,
            value: phis[0],
        });
    }
    cert.grid_nodes = n + 1;
    let stride = n.div_ceil(MAX_PHI_SAMPLES - 1).max(1);
    cert.phi_samples = (0..=n)
        .filter(|i| i % stride == 0 || *i == n)
        .map(|i| [nodes[i], phis[i]])
        .collect();

    let log_r: Vec<f64> = nodes.iter().map(|r| r.ln()).collect();
    let log_phi: Vec<f64> = phis.iter().map(|v| v.ln()).collect();
    let full = Pchip::new(log_r.clone(), log_phi.clone());
    let half_idx: Vec<usize> = (0..=n).filter(|i| i % 2 == 0 || *i == n).collect();
    let half = Pchip::new(
        half_idx.iter().map(|&i| log_r[i]).collect(),
        half_idx.iter().map(|&i| log_phi[i]).collect(),
    );

    let breaks = geometric_breakpoints(r0, r_grid);
    let outer = QuadOptions {
        abs_tol: tol / 4.0,
        rel_tol: 0.0,
        max_evaluations: 4_000_000,
    };
    let criterion_on = |table: &Pchip| -> Result<_, CertifyError> {
        let g = |s: f64| -> Result<f64, CertifyError> {
            let ph = table.eval(s.ln()).exp();
            Ok((ph / a(s)?).powf(expo))
        };
        with_trap(&g, |gf| integrate_partition(gf, &breaks, &outer))
    };
    let main = criterion_on(&full)?;
    let coarse = criterion_on(&half)?;

    let mut value = main.value;
    let mut quad_err = main.abs_error_estimate;
    if r_top > r_grid {
        let far_breaks = geometric_breakpoints(r_grid, r_top);
        let far_opts = QuadOptions {
            abs_tol: tol / 8.0,
            rel_tol: 0.0,
            max_evaluations: 400_000,
        };
        let far = with_trap(&g_direct, |g| {
            integrate_partition(g, &far_breaks, &far_opts)
        })?;
        value += far.value;
        quad_err += far.abs_error_estimate + far.value.abs() * PHI_REL_TOL * expo;
    }
    let budget = ErrorBudget {
        quadrature: quad_err,
        tail: tail_bound,
        interpolation: (main.value - coarse.value).abs(),
        phi_propagation: expo * max_rel_phi * value.abs(),
    };
    let total = budget.total();
    cert.criterion_integral = Some(value);
    cert.error_budget = Some(total);
    cert.budget = Some(budget);
    cert.verdict = if value + total <= cert.bound {
        Verdict::Certified
    } else {
        if value - total <= cert.bound {
            cert.inconclusive = true;
            cert.notes
                .push("inconclusive: the bound lies within the error budget; tighten tol".into());
        }
        Verdict::NotCertified
    };
    if !cert.certified_tail {
        cert.notes
            .push("tail exponents were probed, not declared; tail bounds are heuristic".into());
    }
    Ok(cert)
}
