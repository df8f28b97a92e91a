//! Weighted Hardy inequality checks
//! `∫ W |∇u|^p_A ≥ ∫ |∇d|^p_A H |u|^p` for radial `u = f∘d`.
//!
//! Since `|∇u|_A = Ψ^{1/2} |f'(d)|` both sides carry the factor `Ψ^{p/2}`,
//! and in polar form they reduce to `∫ s^{Q-1} W |f'|^p` and
//! `∫ s^{Q-1} H |f|^p`. The Monte Carlo path integrates the unreduced
//! integrands over a box.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Geometry, GeometryError};
use crate::optimize::{from_box, nelder_mead, to_box, SimplexOptions};
use crate::profile::{hardy_critical_exponent, ProfileError, TestProfile};
use crate::quadrature::{
    geometric_breakpoints, integrate_from_origin, integrate_partition, mc_integrate, BoxDomain,
    Exclusion, McResult, QuadError, QuadOptions, QuadResult,
};
use crate::weight::{WeightError, WeightFn};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("integrand is not integrable at the origin (local exponent {exponent})")]
    DivergentAtOrigin { exponent: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RadialQuadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_error: f64,
    pub rhs_error: f64,
    /// `None` when both sides vanish.
    pub ratio: Option<f64>,
    pub uncertainty: f64,
    pub method: Method,
    pub profile: TestProfile,
    pub description: String,
    pub degenerate: bool,
    /// Ratio change when the exclusion radius is halved.
    pub exclusion_sensitivity: Option<f64>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    pub(crate) fn from_sides(
        lhs: f64,
        lhs_error: f64,
        rhs: f64,
        rhs_error: f64,
        method: Method,
        profile: TestProfile,
    ) -> Self {
        let degenerate = lhs == 0.0 && rhs == 0.0;
        let (ratio, uncertainty) = if degenerate || rhs == 0.0 {
            (None, 0.0)
        } else {
            let ratio = lhs / rhs;
            let unc = ratio.abs()
                * (lhs_error / lhs.abs().max(f64::MIN_POSITIVE) + rhs_error / rhs.abs());
            (Some(ratio), unc)
        };
        let mut notes = Vec::new();
        if degenerate {
            notes.push("degenerate: both sides vanish".to_string());
        } else if rhs == 0.0 {
            notes.push("right-hand side vanishes".to_string());
        }
        InequalityReport {
            lhs,
            rhs,
            lhs_error,
            rhs_error,
            ratio,
            uncertainty,
            method,
            profile,
            description: profile.describe(),
            degenerate,
            exclusion_sensitivity: None,
            notes,
        }
    }

    pub(crate) fn degenerate(method: Method, profile: TestProfile) -> Self {
        Self::from_sides(0.0, 0.0, 0.0, 0.0, method, profile)
    }

    /// `ratio >= 1 - k * uncertainty`; degenerate reports pass trivially.
    pub fn holds_within(&self, k: f64) -> bool {
        match self.ratio {
            Some(r) => r >= 1.0 - k * self.uncertainty,
            None => true,
        }
    }
}

/// Integrates a fallible radial integrand over `[r_in, R]` (`r_in = 0`
/// allowed), turning the first evaluation failure into its own error.
pub(crate) fn radial_integral(
    f: &dyn Fn(f64) -> Result<f64, WeightError>,
    r_in: f64,
    radius: f64,
    breaks: &[f64],
    tol: f64,
) -> Result<QuadResult, HardyError> {
    let g = |s: f64| f(s).unwrap_or(f64::NAN);
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: tol,
        max_evaluations: 4_000_000,
    };
    let res = if r_in > 0.0 {
        let mut pts = geometric_breakpoints(r_in, radius);
        pts.extend(breaks.iter().filter(|&&b| b > r_in && b < radius));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        integrate_partition(g, &pts, &opts)
    } else {
        integrate_from_origin(g, radius, breaks, &opts)
    };
    res.map_err(|e| match e {
        QuadError::NonFinite { x } => match f(x) {
            Err(w) => HardyError::Weight(w),
            Ok(_) => HardyError::Quadrature(e),
        },
        QuadError::Divergent { exponent } => HardyError::DivergentAtOrigin { exponent },
        e => HardyError::Quadrature(e),
    })
}

fn check_common(p: f64, profile: &TestProfile) -> Result<(), HardyError> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(HardyError::Invalid(format!("p = {p}")));
    }
    profile.validate()?;
    Ok(())
}

/// One-dimensional sides `∫_0^R s^{Q-1} W |f'|^p` and `∫_0^R s^{Q-1} H |f|^p`.
pub fn hardy_radial(
    q: f64,
    p: f64,
    w: &WeightFn,
    h: &WeightFn,
    profile: &TestProfile,
    tol: f64,
) -> Result<InequalityReport, HardyError> {
    hardy_radial_on(q, p, w, h, profile, tol, 0.0)
}

/// As [`hardy_radial`] on the annulus `[r_in, R]`.
pub fn hardy_radial_on(
    q: f64,
    p: f64,
    w: &WeightFn,
    h: &WeightFn,
    profile: &TestProfile,
    tol: f64,
    r_in: f64,
) -> Result<InequalityReport, HardyError> {
    check_common(p, profile)?;
    if !(q > 0.0) || !(tol > 0.0) || !(r_in >= 0.0) {
        return Err(HardyError::Invalid(format!(
            "Q = {q}, tol = {tol}, r_in = {r_in}"
        )));
    }
    if profile.is_zero() {
        return Ok(InequalityReport::degenerate(
            Method::RadialQuadrature,
            *profile,
        ));
    }
    let radius = profile.radius();
    if r_in >= radius {
        return Err(HardyError::Invalid(format!(
            "inner radius {r_in} >= support {radius}"
        )));
    }
    let lhs_f = |s: f64| -> Result<f64, WeightError> {
        let d1 = profile.derivative(s);
        if d1 == 0.0 {
            return Ok(0.0);
        }
        Ok(s.powf(q - 1.0) * w.eval(s)? * d1.abs().powf(p))
    };
    let rhs_f = |s: f64| -> Result<f64, WeightError> {
        let v = profile.value(s);
        if v == 0.0 {
            return Ok(0.0);
        }
        Ok(s.powf(q - 1.0) * h.eval_raw(s)? * v.abs().powf(p))
    };
    let breaks = profile.breakpoints();
    let lhs = radial_integral(&lhs_f, r_in, radius, &breaks, tol)?;
    let rhs = radial_integral(&rhs_f, r_in, radius, &breaks, tol)?;
    Ok(InequalityReport::from_sides(
        lhs.value,
        lhs.abs_error_estimate,
        rhs.value,
        rhs.abs_error_estimate,
        Method::RadialQuadrature,
        *profile,
    ))
}

/// Monte Carlo setup for group checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub box_half_width: f64,
    pub exclusion: f64,
    pub samples: usize,
    pub seed: u64,
    pub sensitivity: bool,
}

impl McSpec {
    pub fn new(box_half_width: f64, exclusion: f64, samples: usize, seed: u64) -> Self {
        McSpec {
            box_half_width,
            exclusion,
            samples,
            seed,
            sensitivity: true,
        }
    }
}

fn mc_sides(
    g: &Geometry,
    w: &WeightFn,
    h: &WeightFn,
    p: f64,
    profile: &TestProfile,
    mc: &McSpec,
    exclusion: f64,
) -> Result<(McResult, McResult), HardyError> {
    let domain = BoxDomain::cube(g.ambient_dim(), mc.box_half_width);
    let radius = profile.radius();
    let gauge = |x: &[f64]| g.quasi_norm(x).unwrap_or(f64::NAN);
    let excl = Exclusion {
        radius: exclusion,
        gauge: &gauge,
    };
    let side = |left: bool| {
        move |x: &[f64]| -> f64 {
            let d = gauge(x);
            if !(d < radius) {
                return 0.0;
            }
            let (v, d1, _) = profile.eval(d);
            let (amp, weight) = if left {
                (d1.abs(), w.eval(d))
            } else {
                (v.abs(), h.eval_raw(d))
            };
            if amp == 0.0 {
                return 0.0;
            }
            let psi = g.psi(x).unwrap_or(f64::NAN);
            match weight {
                Ok(c) => psi.powf(p / 2.0) * c * amp.powf(p),
                Err(_) => f64::NAN,
            }
        }
    };
    let lhs_f = side(true);
    let rhs_f = side(false);
    let lhs = mc_integrate(&lhs_f, &domain, Some(&excl), mc.samples, mc.seed);
    let rhs = mc_integrate(&rhs_f, &domain, Some(&excl), mc.samples, mc.seed);
    let lift = |e: QuadError| match e {
        QuadError::NonFiniteSample { ref point } => {
            let d = gauge(point);
            match (w.eval(d), h.eval_raw(d)) {
                (Err(err), _) | (_, Err(err)) => HardyError::Weight(err),
                _ => HardyError::Quadrature(e),
            }
        }
        e => HardyError::Quadrature(e),
    };
    Ok((lhs.map_err(lift)?, rhs.map_err(lift)?))
}

/// Monte Carlo sides of the group inequality for `u = f∘d` over a box with
/// the gauge ball of radius `mc.exclusion` removed.
pub fn hardy_group(
    g: &Geometry,
    w: &WeightFn,
    h: &WeightFn,
    p: f64,
    profile: &TestProfile,
    mc: &McSpec,
) -> Result<InequalityReport, HardyError> {
    check_common(p, profile)?;
    if !g.has_gauge() {
        return Err(GeometryError::GaugeUnavailable(g.to_string()).into());
    }
    if !(mc.exclusion > 0.0) || !(mc.box_half_width > 0.0) {
        return Err(HardyError::Invalid(format!(
            "exclusion = {}, half width = {}",
            mc.exclusion, mc.box_half_width
        )));
    }
    if profile.is_zero() {
        return Ok(InequalityReport::degenerate(Method::MonteCarlo, *profile));
    }
    let (lhs, rhs) = mc_sides(g, w, h, p, profile, mc, mc.exclusion)?;
    let mut report = InequalityReport::from_sides(
        lhs.value,
        lhs.std_error,
        rhs.value,
        rhs.std_error,
        Method::MonteCarlo,
        *profile,
    );
    if mc.sensitivity {
        let (l2, r2) = mc_sides(g, w, h, p, profile, mc, mc.exclusion / 2.0)?;
        if let (Some(r), true) = (report.ratio, r2.value != 0.0) {
            report.exclusion_sensitivity = Some((l2.value / r2.value - r).abs());
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consistency {
    pub group: InequalityReport,
    pub radial: InequalityReport,
    pub gap: f64,
    pub combined_uncertainty: f64,
    pub within: bool,
}

/// Relative gap between the Monte Carlo ratio and the radial ratio on the
/// same annulus `[exclusion, R]`.
pub fn mc_radial_consistency(
    g: &Geometry,
    w: &WeightFn,
    h: &WeightFn,
    p: f64,
    profile: &TestProfile,
    mc: &McSpec,
    tol: f64,
) -> Result<Consistency, HardyError> {
    let group = hardy_group(g, w, h, p, profile, mc)?;
    let radial = hardy_radial_on(g.homogeneous_dim(), p, w, h, profile, tol, mc.exclusion)?;
    let (rg, rr) = match (group.ratio, radial.ratio) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(HardyError::Invalid("degenerate ratio".into())),
    };
    let gap = (rg - rr).abs() / rr.abs();
    let combined_uncertainty = (group.uncertainty + radial.uncertainty) / rr.abs();
    Ok(Consistency {
        within: gap <= 3.0 * combined_uncertainty,
        group,
        radial,
        gap,
        combined_uncertainty,
    })
}

/// Profile family searched by [`best_constant_search`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchFamily {
    /// Parameter `ε`.
    NearExtremal,
    /// Parameters `(β, k)`.
    Bump,
    /// Parameter `σ`.
    Gaussian,
}

impl SearchFamily {
    pub fn dimension(&self) -> usize {
        match self {
            SearchFamily::Bump => 2,
            _ => 1,
        }
    }

    pub fn default_bounds(&self) -> Vec<(f64, f64)> {
        match self {
            SearchFamily::NearExtremal => vec![(1e-3, 1.0)],
            SearchFamily::Bump => vec![(0.5, 8.0), (1.0, 8.0)],
            SearchFamily::Gaussian => vec![(0.02, 1.0)],
        }
    }

    pub fn profile(&self, params: &[f64], q: f64, p: f64, radius: f64) -> TestProfile {
        match self {
            SearchFamily::NearExtremal => TestProfile::NearExtremal {
                epsilon: params[0],
                critical: hardy_critical_exponent(q, p),
                radius,
                inner: 1e-2,
            },
            SearchFamily::Bump => TestProfile::Bump {
                beta: params[0],
                k: params[1],
                radius,
            },
            SearchFamily::Gaussian => TestProfile::Gaussian {
                sigma: params[0] * radius,
                radius,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestConstant {
    pub c_star: f64,
    pub params: Vec<f64>,
    pub profile: TestProfile,
    pub evaluations: usize,
    pub restarts: usize,
    /// No restart met the simplex convergence test.
    pub stagnated: bool,
}

/// Minimizes the radial ratio `lhs/rhs` with `H = h0` over a profile family.
/// Parameters live in `log` space mapped onto their bounds; the simplex is
/// restarted from a grid of three points per parameter.
#[allow(clippy::too_many_arguments)]
pub fn best_constant_search(
    q: f64,
    p: f64,
    w: &WeightFn,
    h0: &WeightFn,
    family: SearchFamily,
    bounds: &[(f64, f64)],
    radius: f64,
    tol: f64,
) -> Result<BestConstant, HardyError> {
    let dim = family.dimension();
    if bounds.len() != dim || bounds.iter().any(|&(lo, hi)| !(lo > 0.0 && hi > lo)) {
        return Err(HardyError::Invalid(format!(
            "need {dim} positive increasing bounds, got {bounds:?}"
        )));
    }
    let logb: Vec<(f64, f64)> = bounds.iter().map(|&(lo, hi)| (lo.ln(), hi.ln())).collect();
    let decode = |u: &[f64]| -> Vec<f64> {
        u.iter()
            .zip(&logb)
            .map(|(&x, &(lo, hi))| to_box(x, lo, hi).exp())
            .collect()
    };
    let ratio_at = |params: &[f64]| -> f64 {
        let prof = family.profile(params, q, p, radius);
        match hardy_radial(q, p, w, h0, &prof, tol) {
            Ok(InequalityReport { ratio: Some(r), .. }) => r,
            _ => f64::INFINITY,
        }
    };
    let fractions = [1.0 / 6.0, 0.5, 5.0 / 6.0];
    let starts: Vec<Vec<f64>> = (0..3usize.pow(dim as u32))
        .map(|mut idx| {
            (0..dim)
                .map(|j| {
                    let fr = fractions[idx % 3];
                    idx /= 3;
                    let (lo, hi) = logb[j];
                    from_box(lo + fr * (hi - lo), lo, hi)
                })
                .collect()
        })
        .collect();
    let opts = SimplexOptions::default();
    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| nelder_mead(|u: &[f64]| ratio_at(&decode(u)), x0, &vec![0.4; dim], &opts))
        .collect();
    let best = runs
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one restart");
    if !best.value.is_finite() {
        return Err(HardyError::Invalid("no finite ratio in the family".into()));
    }
    let params = decode(&best.x);
    Ok(BestConstant {
        c_star: best.value,
        profile: family.profile(&params, q, p, radius),
        params,
        evaluations: runs.iter().map(|r| r.evaluations).sum(),
        restarts: runs.len(),
        stagnated: runs.iter().all(|r| !r.converged),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub ratio: f64,
    pub uncertainty: f64,
}

/// Radial ratios along a one-parameter family of profiles.
pub fn ratio_sweep(
    q: f64,
    p: f64,
    w: &WeightFn,
    h: &WeightFn,
    profiles: &[(f64, TestProfile)],
    tol: f64,
) -> Result<Vec<SweepPoint>, HardyError> {
    profiles
        .par_iter()
        .map(|(param, prof)| {
            let rep = hardy_radial(q, p, w, h, prof, tol)?;
            Ok(SweepPoint {
                param: *param,
                ratio: rep.ratio.unwrap_or(f64::NAN),
                uncertainty: rep.uncertainty,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::default_family;

    fn wf(s: &str) -> WeightFn {
        WeightFn::parse(s).unwrap()
    }

    #[test]
    fn classical_hardy_holds() {
        let prof = TestProfile::Bump {
            beta: 2.0,
            k: 2.0,
            radius: 1.0,
        };
        let rep = hardy_radial(3.0, 2.0, &wf("1"), &wf("0.25 * pow(r, -2)"), &prof, 1e-10).unwrap();
        assert!(rep.ratio.unwrap() >= 1.0);
        // f = (1 - r²)²: lhs = 16 ∫ r⁴(1-r²)² = 128/315, rhs = ∫ (1-r²)⁴ / 4 = 32/315
        assert!((rep.lhs - 128.0 / 315.0).abs() < 1e-9);
        assert!((rep.rhs - 32.0 / 315.0).abs() < 1e-9);
    }

    #[test]
    fn zero_profile_is_degenerate() {
        let rep = hardy_radial(
            3.0,
            2.0,
            &wf("1"),
            &wf("pow(r, -2)"),
            &TestProfile::Zero { radius: 1.0 },
            1e-8,
        )
        .unwrap();
        assert!(rep.degenerate && rep.ratio.is_none());
        assert_eq!((rep.lhs, rep.rhs), (0.0, 0.0));
    }

    #[test]
    fn supercritical_constant_is_violated() {
        let prof = TestProfile::NearExtremal {
            epsilon: 0.05,
            critical: -0.5,
            radius: 1.0,
            inner: 1e-2,
        };
        let rep = hardy_radial(3.0, 2.0, &wf("1"), &wf("0.3 * pow(r, -2)"), &prof, 1e-10).unwrap();
        assert!(rep.ratio.unwrap() < 1.0, "{rep:?}");
    }

    #[test]
    fn non_integrable_profile_is_rejected() {
        let prof = TestProfile::NearExtremal {
            epsilon: -0.1,
            critical: -0.5,
            radius: 1.0,
            inner: 1e-2,
        };
        assert!(hardy_radial(3.0, 2.0, &wf("1"), &wf("pow(r, -2)"), &prof, 1e-8).is_err());
        let prof = TestProfile::NearExtremal {
            epsilon: 0.1,
            critical: -0.7,
            radius: 1.0,
            inner: 1e-2,
        };
        assert!(matches!(
            hardy_radial(3.0, 2.0, &wf("1"), &wf("pow(r, -2)"), &prof, 1e-8),
            Err(HardyError::DivergentAtOrigin { .. })
        ));
    }

    #[test]
    fn default_family_respects_critical_constant() {
        for q in [3.0f64, 4.0, 5.0] {
            let c = ((q - 2.0) / 2.0).powi(2);
            let h = wf(&format!("{c} * pow(r, -2)"));
            for prof in default_family(hardy_critical_exponent(q, 2.0), 1.0) {
                let rep = hardy_radial(q, 2.0, &wf("1"), &h, &prof, 1e-10).unwrap();
                assert!(rep.ratio.unwrap() >= 1.0 - 1e-6, "{q} {prof:?} {rep:?}");
            }
        }
    }

    #[test]
    fn group_requires_a_gauge() {
        let prof = TestProfile::Bump {
            beta: 2.0,
            k: 2.0,
            radius: 1.0,
        };
        let mc = McSpec::new(2.0, 0.1, 10_000, 1);
        assert!(matches!(
            hardy_group(
                &Geometry::Engel,
                &wf("1"),
                &wf("pow(r, -2)"),
                2.0,
                &prof,
                &mc
            ),
            Err(HardyError::Geometry(GeometryError::GaugeUnavailable(_)))
        ));
    }

    #[test]
    fn euclidean_monte_carlo_matches_radial() {
        let prof = TestProfile::Bump {
            beta: 2.0,
            k: 2.0,
            radius: 1.0,
        };
        let mc = McSpec {
            sensitivity: false,
            ..McSpec::new(1.0, 0.05, 200_000, 7)
        };
        let c = mc_radial_consistency(
            &Geometry::Euclidean { n: 3 },
            &wf("1"),
            &wf("0.25 * pow(r, -2)"),
            2.0,
            &prof,
            &mc,
            1e-10,
        )
        .unwrap();
        assert!(c.within, "{c:?}");
    }
}
