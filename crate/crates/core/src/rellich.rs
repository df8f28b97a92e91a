//! Weighted Rellich inequalities `∫ W |Δu|^p >= ∫ H |u|^p` on `ℝⁿ`.
//!
//! All computations are radial: `Δf = f'' + (n-1) f'/r`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fd;
use crate::hardy::{radial_integral, HardyError, InequalityReport, Method};
use crate::profile::{ProfileError, TestProfile};
use crate::weight::{WeightError, WeightFn};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RellichError {
    #[error("γ = {gamma} outside ({lo}, {hi}) for n = {n}, p = {p}")]
    OutOfRange {
        n: u32,
        p: f64,
        gamma: f64,
        lo: f64,
        hi: f64,
    },
    #[error("n = {n} is below the minimum {min}")]
    TooSmallN { n: u32, min: u32 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Integration(#[from] HardyError),
}

fn pow_exact(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// Admissible open interval `(2 - n/p, n(p-1)/p)` for `γ`.
pub fn gamma_range(n: u32, p: f64) -> (f64, f64) {
    let n = n as f64;
    (2.0 - n / p, n * (p - 1.0) / p)
}

/// `(n/p - 2 + γ)^p (n(p-1)/p - γ)^p`.
pub fn rellich_constant(n: u32, p: f64, gamma: f64) -> Result<f64, RellichError> {
    if n < 3 {
        return Err(RellichError::TooSmallN { n, min: 3 });
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(RellichError::Invalid(format!("p = {p}")));
    }
    let (lo, hi) = gamma_range(n, p);
    if !(gamma > lo && gamma < hi) {
        return Err(RellichError::OutOfRange {
            n,
            p,
            gamma,
            lo,
            hi,
        });
    }
    let nf = n as f64;
    Ok(pow_exact(nf / p - 2.0 + gamma, p) * pow_exact(nf * (p - 1.0) / p - gamma, p))
}

/// `n²(n-4)²/16`, for `n >= 5`.
pub fn rellich_classical_constant(n: u32) -> Result<f64, RellichError> {
    if n < 5 {
        return Err(RellichError::TooSmallN { n, min: 5 });
    }
    let nf = n as f64;
    Ok(nf * nf * (nf - 4.0) * (nf - 4.0) / 16.0)
}

/// `(n/p - 2)^p (n(p-1)/p)^p`, for `1 < p < n/2`.
pub fn okazawa_constant(n: u32, p: f64) -> Result<f64, RellichError> {
    let nf = n as f64;
    if !(p > 1.0 && p < nf / 2.0) {
        return Err(RellichError::Invalid(format!(
            "need 1 < p < n/2, got p = {p}, n = {n}"
        )));
    }
    Ok(pow_exact(nf / p - 2.0, p) * pow_exact(nf * (p - 1.0) / p, p))
}

/// Exponent of the extremal supersolution `v = r^α` paired with
/// `W = r^{γp}`: `α = -(n/p + γ - 2)`.
pub fn extremal_exponent(n: u32, p: f64, gamma: f64) -> f64 {
    -(n as f64 / p + gamma - 2.0)
}

/// Per-radius outcome of the hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisPoint {
    pub r: f64,
    /// `Δ(W|Δv|^{p-2}Δv) - H v^{p-1}`.
    pub slack: f64,
    pub h_term: f64,
    pub neg_lap_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub min_slack: f64,
    /// Largest `|slack| / |H v^{p-1}|`.
    pub max_rel_slack: f64,
    pub neg_lap_v_min: f64,
    /// Radii where `-Δv <= 0`.
    pub violations: Vec<f64>,
    /// Slack nonnegative up to `tol |H v^{p-1}|` and `-Δv > 0` everywhere.
    pub holds: bool,
    pub points: Vec<HypothesisPoint>,
}

/// Step of both nested Laplacians.
fn lap_step(r: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 8.0) * r
}

/// Checks `Δ(W|Δv|^{p-2}Δv) >= H v^{p-1}` and `-Δv > 0` at each radius,
/// with nested radial Laplacians.
pub fn rellich_hypothesis_check_fn(
    w: &dyn Fn(f64) -> f64,
    v: &dyn Fn(f64) -> f64,
    h: &dyn Fn(f64) -> f64,
    p: f64,
    n: u32,
    radii: &[f64],
    tol: f64,
) -> Result<HypothesisReport, RellichError> {
    if !(p > 1.0) || n < 1 || radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(RellichError::Invalid(format!(
            "p = {p}, n = {n}, radii must be positive and non-empty"
        )));
    }
    let nf = n as f64;
    let lap_v = |r: f64| fd::radial_laplacian7(v, nf, r, lap_step(r));
    let g = |r: f64| {
        let l = lap_v(r);
        w(r) * l.abs().powf(p - 2.0) * l
    };
    let mut points = Vec::with_capacity(radii.len());
    for &r in radii {
        let vr = v(r);
        if !(vr > 0.0) {
            return Err(RellichError::Invalid(format!(
                "v({r}) = {vr} is not positive"
            )));
        }
        let neg_lap_v = -lap_v(r);
        let lap_g = fd::radial_laplacian7(&g, nf, r, lap_step(r));
        let h_term = h(r) * vr.powf(p - 1.0);
        let slack = lap_g - h_term;
        if !slack.is_finite() || !neg_lap_v.is_finite() {
            return Err(RellichError::Invalid(format!(
                "non-finite evaluation at r = {r}"
            )));
        }
        points.push(HypothesisPoint {
            r,
            slack,
            h_term,
            neg_lap_v,
        });
    }
    let min_slack = points.iter().map(|q| q.slack).fold(f64::INFINITY, f64::min);
    let max_rel_slack = points
        .iter()
        .map(|q| q.slack.abs() / q.h_term.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let neg_lap_v_min = points
        .iter()
        .map(|q| q.neg_lap_v)
        .fold(f64::INFINITY, f64::min);
    let violations: Vec<f64> = points
        .iter()
        .filter(|q| q.neg_lap_v <= 0.0)
        .map(|q| q.r)
        .collect();
    let holds = violations.is_empty() && points.iter().all(|q| q.slack >= -tol * q.h_term.abs());
    Ok(HypothesisReport {
        min_slack,
        max_rel_slack,
        neg_lap_v_min,
        violations,
        holds,
        points,
    })
}

/// [`rellich_hypothesis_check_fn`] with parsed weights; `v` is read as a
/// radial expression.
pub fn rellich_hypothesis_check(
    w: &WeightFn,
    v: &WeightFn,
    h: &WeightFn,
    p: f64,
    n: u32,
    radii: &[f64],
    tol: f64,
) -> Result<HypothesisReport, RellichError> {
    for &r in radii {
        w.eval(r)?;
        v.eval(r)?;
        h.eval_raw(r)?;
    }
    let wf = |r: f64| w.eval(r).unwrap_or(f64::NAN);
    let vf = |r: f64| v.eval_raw(r).unwrap_or(f64::NAN);
    let hf = |r: f64| h.eval_raw(r).unwrap_or(f64::NAN);
    rellich_hypothesis_check_fn(&wf, &vf, &hf, p, n, radii, tol)
}

/// `n` points spaced geometrically on `[a, b]`.
pub fn geometric_radii(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![a];
    }
    let step = (b / a).ln() / (count - 1) as f64;
    (0..count).map(|i| a * (step * i as f64).exp()).collect()
}

/// Radial sides `∫ s^{n-1} W |Δf|^p` and `∫ s^{n-1} H |f|^p` over
/// `[r_in, R]`.
pub fn rellich_check(
    w: &WeightFn,
    h: &WeightFn,
    p: f64,
    n: u32,
    profile: &TestProfile,
    tol: f64,
    r_in: f64,
) -> Result<InequalityReport, RellichError> {
    if !(p > 1.0 && p.is_finite()) || n < 1 || !(tol > 0.0) || !(r_in >= 0.0) {
        return Err(RellichError::Invalid(format!(
            "p = {p}, n = {n}, tol = {tol}, r_in = {r_in}"
        )));
    }
    profile.validate()?;
    if profile.is_zero() {
        return Ok(InequalityReport::degenerate(
            Method::RadialQuadrature,
            *profile,
        ));
    }
    let radius = profile.radius();
    if r_in >= radius {
        return Err(RellichError::Invalid(format!(
            "inner radius {r_in} >= support {radius}"
        )));
    }
    let nf = n as f64;
    let lhs_f = |s: f64| -> Result<f64, WeightError> {
        let (_, f1, f2) = profile.eval(s);
        let lap = f2 + (nf - 1.0) * f1 / s;
        if lap == 0.0 {
            return Ok(0.0);
        }
        Ok(s.powf(nf - 1.0) * w.eval(s)? * lap.abs().powf(p))
    };
    let rhs_f = |s: f64| -> Result<f64, WeightError> {
        let f = profile.value(s);
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(s.powf(nf - 1.0) * h.eval_raw(s)? * f.abs().powf(p))
    };
    let breaks = profile.breakpoints();
    let lhs = radial_integral(&lhs_f, r_in, radius, &breaks, tol)?;
    let rhs = radial_integral(&rhs_f, r_in, radius, &breaks, tol)?;
    let mut report = InequalityReport::from_sides(
        lhs.value,
        lhs.abs_error_estimate,
        rhs.value,
        rhs.abs_error_estimate,
        Method::RadialQuadrature,
        *profile,
    );
    report.description = format!("rellich n = {n}, p = {p}: {}", report.description);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(rellich_constant(5, 2.0, 0.0).unwrap(), 1.5625);
        assert_eq!(rellich_constant(6, 2.0, 0.0).unwrap(), 9.0);
        assert_eq!(rellich_constant(5, 2.0, 2.0).unwrap(), 1.5625);
        assert!(matches!(
            rellich_constant(5, 2.0, 2.5),
            Err(RellichError::OutOfRange { .. })
        ));
        assert_eq!(rellich_classical_constant(5).unwrap(), 1.5625);
        assert_eq!(rellich_classical_constant(6).unwrap(), 9.0);
        assert_eq!(rellich_classical_constant(8).unwrap(), 64.0);
        assert!(rellich_classical_constant(4).is_err());
        for n in 5..=12 {
            assert_eq!(
                rellich_constant(n, 2.0, 0.0).unwrap(),
                rellich_classical_constant(n).unwrap()
            );
        }
        for n in [5, 7, 9] {
            for p in [1.5, 2.0, 3.0] {
                if p < n as f64 / 2.0 {
                    assert_eq!(
                        rellich_constant(n, p, 0.0).unwrap(),
                        okazawa_constant(n, p).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn radial_laplacian_of_powers() {
        for n in [3.0, 5.0, 8.0] {
            for m in [2.0f64, 3.0, 4.0] {
                for r in [0.5, 1.0, 3.0] {
                    let f = |s: f64| s.powf(m);
                    let got = fd::radial_laplacian(&f, n, r, f64::EPSILON.powf(0.25) * r);
                    let want = m * (m + n - 2.0) * r.powf(m - 2.0);
                    assert!(((got - want) / want).abs() < 1e-7, "{n} {m} {r}");
                }
            }
        }
    }

    fn w1(s: &str) -> WeightFn {
        WeightFn::new(s, 0.0, f64::INFINITY, None).unwrap()
    }

    #[test]
    fn hypothesis_equality_case() {
        let radii = geometric_radii(0.5, 5.0, 40);
        let rep = rellich_hypothesis_check(
            &w1("1"),
            &w1("pow(r, -0.5)"),
            &w1("(25/16)*pow(r, -4)"),
            2.0,
            5,
            &radii,
            1e-5,
        )
        .unwrap();
        assert!(rep.max_rel_slack <= 1e-5, "{}", rep.max_rel_slack);
        assert!(rep.holds);
        for q in &rep.points {
            let want = 1.25 * q.r.powf(-2.5);
            assert!((q.neg_lap_v - want).abs() <= 1e-7 * want);
        }

        let rep = rellich_hypothesis_check(
            &w1("1"),
            &w1("pow(r, -0.5)"),
            &w1("2*(25/16)*pow(r, -4)"),
            2.0,
            5,
            &radii,
            1e-5,
        )
        .unwrap();
        assert!(rep.min_slack < 0.0 && !rep.holds);

        let rep =
            rellich_hypothesis_check(&w1("1"), &w1("pow(r, 2)"), &w1("0"), 2.0, 5, &radii, 1e-5)
                .unwrap();
        assert_eq!(rep.violations.len(), radii.len());
        assert!((rep.neg_lap_v_min + 10.0).abs() < 1e-6);
    }

    #[test]
    fn weighted_extremal_slack() {
        let radii = geometric_radii(0.5, 5.0, 25);
        for (n, p, gamma) in [
            (5u32, 2.0, 0.5),
            (7, 3.0, 0.0),
            (6, 1.5, 0.3),
            (5, 2.0, -0.3),
            (9, 1.5, -3.0),
            (5, 2.0, 2.0),
        ] {
            let c = rellich_constant(n, p, gamma).unwrap();
            let alpha = extremal_exponent(n, p, gamma);
            let w = move |r: f64| r.powf(gamma * p);
            let v = move |r: f64| r.powf(alpha);
            let h = move |r: f64| c * r.powf((gamma - 2.0) * p);
            let rep = rellich_hypothesis_check_fn(&w, &v, &h, p, n, &radii, 1e-5).unwrap();
            assert!(
                rep.max_rel_slack <= 1e-5,
                "{n} {p} {gamma}: {}",
                rep.max_rel_slack
            );
        }
    }

    #[test]
    fn inequality_checks() {
        let h = w1("(25/16)*pow(r, -4)");
        let g = TestProfile::Gaussian {
            sigma: 0.3,
            radius: 1.0,
        };
        let rep = rellich_check(&w1("1"), &h, 2.0, 5, &g, 1e-9, 0.0).unwrap();
        assert!(rep.ratio.unwrap() >= 1.0 - 1e-5, "{rep:?}");

        let ne = TestProfile::NearExtremal {
            epsilon: 0.05,
            critical: -0.5,
            radius: 1.0,
            inner: 0.01,
        };
        let rep = rellich_check(
            &w1("1"),
            &w1("1.2*(25/16)*pow(r, -4)"),
            2.0,
            5,
            &ne,
            1e-8,
            0.0,
        )
        .unwrap();
        assert!(rep.ratio.unwrap() < 1.0, "{rep:?}");

        let rep = rellich_check(
            &w1("1"),
            &h,
            2.0,
            5,
            &TestProfile::Zero { radius: 1.0 },
            1e-8,
            0.0,
        )
        .unwrap();
        assert!(rep.degenerate && rep.ratio.is_none());
    }
}
