//! One-dimensional adaptive quadrature and box Monte Carlo.
//!
//! The adaptive integrator is a globally adaptive 7/15-point Gauss-Kronrod
//! scheme: the interval with the largest error estimate is bisected until the
//! summed estimate meets the tolerance. The rule is open, so integrable
//! endpoint singularities are handled by bisection alone.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error(
        "no convergence after {evaluations} evaluations: value {value}, error estimate {abs_error}"
    )]
    NonConvergence {
        value: f64,
        abs_error: f64,
        evaluations: usize,
    },
    #[error("tail integral diverges (decay exponent {exponent} >= -1)")]
    Divergent { exponent: f64 },
    #[error("tail doubling did not converge up to R = {radius}")]
    TailNonConvergence { radius: f64 },
    #[error("invalid interval or tolerance: {0}")]
    InvalidInput(String),
    #[error("Monte Carlo acceptance ratio {ratio} is below 1%")]
    LowAcceptance { ratio: f64 },
    #[error("non-finite integrand at sample point {point:?}")]
    NonFiniteSample { point: Vec<f64> },
}

/// Result of a one-dimensional integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    /// Upper truncation radius used for a semi-infinite integral.
    pub tail_truncation_radius: Option<f64>,
    /// Set when the tail was truncated without a power-law majorant.
    pub heuristic: bool,
}

/// Tolerances and budget of the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            rel_tol: 0.0,
            max_evaluations: 1_000_000,
        }
    }

    pub fn relative(tol: f64) -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: tol,
            max_evaluations: 1_000_000,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err.abs();
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, QuadError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFinite { x })
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    let error = rescale_error((res_k - res_g) * half, res_abs * h, res_asc * h);
    Ok(Segment { a, b, value, error })
}

/// Globally adaptive integration over the given breakpoints.
pub fn integrate_partition<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    if breakpoints.len() < 2 {
        return Err(QuadError::InvalidInput(
            "need at least two breakpoints".into(),
        ));
    }
    if !(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0 && opts.abs_tol + opts.rel_tol > 0.0) {
        return Err(QuadError::InvalidInput("tolerance must be positive".into()));
    }
    for w in breakpoints.windows(2) {
        if !(w[0] < w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(QuadError::InvalidInput(format!(
                "breakpoints must be finite and increasing, got {} and {}",
                w[0], w[1]
            )));
        }
    }
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0usize;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breakpoints.windows(2) {
        let s = gk15(&mut f, w[0], w[1])?;
        evaluations += 15;
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    // Segments too narrow to split; their error is final.
    let mut frozen_err = 0.0;
    let mut frozen_val = 0.0;
    let mut iterations = 0usize;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) <= 4.0 * f64::EPSILON * mid.abs()
        {
            frozen_err += worst.error;
            frozen_val += worst.value;
            continue;
        }
        if evaluations + 30 > opts.max_evaluations {
            heap.push(worst);
            return Err(QuadError::NonConvergence {
                value: total,
                abs_error: total_err,
                evaluations,
            });
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        iterations += 1;
        if iterations.is_multiple_of(256) {
            total = frozen_val + heap.iter().map(|s| s.value).sum::<f64>();
            total_err = frozen_err + heap.iter().map(|s| s.error).sum::<f64>();
        }
    }
    total = frozen_val + heap.iter().map(|s| s.value).sum::<f64>();
    total_err = frozen_err + heap.iter().map(|s| s.error).sum::<f64>();
    let target = opts.abs_tol.max(opts.rel_tol * total.abs());
    if total_err > target {
        return Err(QuadError::NonConvergence {
            value: total,
            abs_error: total_err,
            evaluations,
        });
    }
    Ok(QuadResult {
        value: total,
        abs_error_estimate: total_err,
        evaluations,
        tail_truncation_radius: None,
        heuristic: false,
    })
}

/// `∫_a^b f` to absolute tolerance `tol`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    if !(tol > 0.0) {
        return Err(QuadError::InvalidInput(format!("tol = {tol}")));
    }
    if !(a < b) {
        return Err(QuadError::InvalidInput(format!(
            "need a < b, got [{a}, {b}]"
        )));
    }
    integrate_partition(f, &[a, b], &QuadOptions::absolute(tol))
}

/// Breakpoints `a = x_0 < ... < x_m = b` with ratio at most 2 between
/// neighbours when `a > 0`, so wide-range integrands start well resolved.
pub fn geometric_breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut x = if a > 0.0 {
        a
    } else {
        (b / 2f64.powi(40)).min(1.0)
    };
    if a <= 0.0 && x < b {
        pts.push(x);
    }
    while 2.0 * x < b && pts.len() < 4000 {
        x *= 2.0;
        pts.push(x);
    }
    if *pts.last().unwrap() < b {
        pts.push(b);
    }
    pts
}

/// Power-law description of a tail, `f(s) ~ C s^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDecay {
    Power(f64),
    Unknown,
}

/// Truncation radius `R >= 2a` for a power tail: the smallest doubling of
/// the start radius with `2 |f(R)| R / |exponent + 1| <= budget`. Returns
/// `(R, bound)`.
pub fn power_tail_radius<F: FnMut(f64) -> f64 + ?Sized>(
    f: &mut F,
    a: f64,
    exponent: f64,
    budget: f64,
) -> Result<(f64, f64), QuadError> {
    if exponent >= -1.0 {
        return Err(QuadError::Divergent { exponent });
    }
    let mut r = if a > 0.0 { 2.0 * a } else { 1.0 };
    for _ in 0..2000 {
        let v = f(r);
        if !v.is_finite() {
            return Err(QuadError::NonFinite { x: r });
        }
        let bound = 2.0 * v.abs() * r / (exponent + 1.0).abs();
        if bound <= budget {
            return Ok((r, bound));
        }
        r *= 2.0;
        if !r.is_finite() || r > 1e300 {
            break;
        }
    }
    Err(QuadError::TailNonConvergence { radius: r })
}

/// `∫_a^∞ f`. With a known power decay the range is truncated where the
/// power-tail majorant falls below `tol/2`; otherwise the upper limit is
/// doubled until successive increments drop below `tol/2` and the result is
/// flagged heuristic.
pub fn integrate_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    decay: TailDecay,
    tol: f64,
) -> Result<QuadResult, QuadError> {
    if !(a >= 0.0 && a.is_finite()) || !(tol > 0.0) {
        return Err(QuadError::InvalidInput(format!("a = {a}, tol = {tol}")));
    }
    match decay {
        TailDecay::Power(exponent) => {
            let (radius, bound) = power_tail_radius(&mut f, a, exponent, tol / 2.0)?;
            let pts = geometric_breakpoints(a, radius);
            let mut res = integrate_partition(&mut f, &pts, &QuadOptions::absolute(tol / 2.0))?;
            res.abs_error_estimate += bound;
            res.tail_truncation_radius = Some(radius);
            Ok(res)
        }
        TailDecay::Unknown => {
            let mut lo = a;
            let mut hi = if a > 0.0 { 2.0 * a } else { 1.0 };
            let mut value = 0.0;
            let mut error = 0.0;
            let mut evaluations = 0;
            let mut prev_increment = f64::INFINITY;
            for _ in 0..64 {
                let piece = integrate_partition(
                    &mut f,
                    &[lo, hi],
                    &QuadOptions {
                        abs_tol: tol / 8.0,
                        rel_tol: 1e-12,
                        max_evaluations: 200_000,
                    },
                )?;
                value += piece.value;
                error += piece.abs_error_estimate;
                evaluations += piece.evaluations;
                let inc = piece.value.abs();
                if inc < tol / 2.0 && prev_increment < f64::INFINITY {
                    return Ok(QuadResult {
                        value,
                        abs_error_estimate: error + inc,
                        evaluations,
                        tail_truncation_radius: Some(hi),
                        heuristic: true,
                    });
                }
                prev_increment = inc;
                lo = hi;
                hi *= 2.0;
            }
            Err(QuadError::TailNonConvergence { radius: hi })
        }
    }
}

/// Local power law near the left endpoint, `f(s) ≈ c s^κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeftPowerLaw {
    pub exponent: f64,
    pub coefficient: f64,
}

/// Fits `f(s) ≈ c s^κ` from samples at `δ, δ/10, δ/100`; `None` when the
/// two log-slopes disagree by more than `1e-6` or samples are not positive.
pub fn fit_left_power<F: FnMut(f64) -> f64>(f: &mut F, delta: f64) -> Option<LeftPowerLaw> {
    let s = [delta / 100.0, delta / 10.0, delta];
    let mut v = [0.0; 3];
    for i in 0..3 {
        v[i] = f(s[i]);
        if !(v[i].is_finite() && v[i] > 0.0) {
            return None;
        }
    }
    let ln10 = std::f64::consts::LN_10;
    let k1 = (v[1].ln() - v[0].ln()) / ln10;
    let k2 = (v[2].ln() - v[1].ln()) / ln10;
    if (k1 - k2).abs() > 1e-6 * (1.0 + k2.abs()) {
        return None;
    }
    Some(LeftPowerLaw {
        exponent: k2,
        coefficient: v[2] / delta.powf(k2),
    })
}

/// `∫_0^b f` for an integrand with an integrable power singularity at 0.
///
/// On `(0, δ]` the integrand is replaced by its fitted power law, integrated
/// in closed form; `[δ, b]` goes to the adaptive integrator. `δ` starts at
/// `1e-6 b` and shrinks by decades until the fit is stable. Identically zero
/// integrands near 0 contribute nothing. Falls back to plain bisection when
/// no power law is found.
pub fn integrate_from_origin<F: FnMut(f64) -> f64>(
    mut f: F,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult, QuadError> {
    if !(b > 0.0) {
        return Err(QuadError::InvalidInput(format!("b = {b}")));
    }
    let mut delta = 1e-6 * b;
    let mut law = None;
    let mut zero_near_origin = false;
    for _ in 0..6 {
        let probe = [delta / 100.0, delta / 10.0, delta];
        if probe.iter().all(|&s| f(s) == 0.0) {
            zero_near_origin = true;
            break;
        }
        if let Some(l) = fit_left_power(&mut f, delta) {
            law = Some(l);
            break;
        }
        delta /= 10.0;
    }
    let mut pts: Vec<f64> = Vec::new();
    match (law, zero_near_origin) {
        (Some(l), _) if l.exponent > -1.0 => {
            pts.extend(geometric_breakpoints(delta, b));
        }
        (Some(l), _) => {
            return Err(QuadError::Divergent {
                exponent: l.exponent,
            })
        }
        (None, true) => pts.extend(geometric_breakpoints(delta, b)),
        (None, false) => {
            pts.push(0.0);
            pts.push(b);
        }
    }
    for &x in breaks {
        if x > pts[0] && x < b && !pts.contains(&x) {
            pts.push(x);
        }
    }
    pts.sort_by(f64::total_cmp);
    let mut res = integrate_partition(&mut f, &pts, opts)?;
    if let Some(l) = law {
        let head = l.coefficient * delta.powf(l.exponent + 1.0) / (l.exponent + 1.0);
        // second-order mismatch of the fit over (0, δ]
        let fit_err = 1e-6 * head.abs();
        res.value += head;
        res.abs_error_estimate += fit_err;
    }
    Ok(res)
}

/// Result of a Monte Carlo integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub accepted: usize,
    pub exclusion_radius: f64,
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        BoxDomain {
            lo: vec![-half_width; dim],
            hi: vec![half_width; dim],
        }
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Points with `gauge(x) < radius` are rejected.
pub struct Exclusion<'a> {
    pub radius: f64,
    pub gauge: &'a (dyn Fn(&[f64]) -> f64 + Sync),
}

const MC_CHUNK: usize = 1 << 15;

#[derive(Clone, Copy, Default)]
struct Moments {
    n: usize,
    accepted: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            accepted: self.accepted + o.accepted,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64,
        }
    }
}

/// Uniform Monte Carlo over `domain` with optional gauge-ball rejection.
///
/// Samples are drawn in fixed chunks, each from its own ChaCha stream keyed
/// by `seed`, so the result does not depend on the thread count.
pub fn mc_integrate(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    domain: &BoxDomain,
    exclusion: Option<&Exclusion<'_>>,
    samples: usize,
    seed: u64,
) -> Result<McResult, QuadError> {
    if samples < 1000 {
        return Err(QuadError::InvalidInput(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    if domain.lo.len() != domain.hi.len()
        || domain.lo.is_empty()
        || domain.lo.iter().zip(&domain.hi).any(|(l, h)| !(l < h))
    {
        return Err(QuadError::InvalidInput("degenerate box".into()));
    }
    let volume = domain.volume();
    let dim = domain.dim();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Result<Moments, QuadError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut m = Moments::default();
            let mut x = vec![0.0; dim];
            for _ in 0..count {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = rng.gen_range(domain.lo[i]..domain.hi[i]);
                }
                let keep = match exclusion {
                    Some(e) => (e.gauge)(&x) >= e.radius,
                    None => true,
                };
                if keep {
                    let v = f(&x);
                    if !v.is_finite() {
                        return Err(QuadError::NonFiniteSample { point: x.clone() });
                    }
                    m.accepted += 1;
                    m.push(volume * v);
                } else {
                    m.push(0.0);
                }
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in partial {
        total = total.merge(p?);
    }
    let ratio = total.accepted as f64 / samples as f64;
    if ratio < 0.01 {
        return Err(QuadError::LowAcceptance { ratio });
    }
    let var = if total.n > 1 {
        total.m2 / (total.n - 1) as f64
    } else {
        0.0
    };
    Ok(McResult {
        value: total.mean,
        std_error: (var / samples as f64).sqrt(),
        samples,
        accepted: total.accepted,
        exclusion_radius: exclusion.map_or(0.0, |e| e.radius),
    })
}
