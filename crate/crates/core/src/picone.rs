//! Pointwise Picone identities.
//!
//! First order, for `v > 0`:
//!
//! ```text
//! R = |∇u|^p_A - ⟨A∇(|u|^p / v^{p-1}), |∇v|^{p-2}_A ∇v⟩
//! L = |∇u|^p_A - p (|u|/v)^{p-1} |∇v|^{p-2}_A ⟨A∇|u|, ∇v⟩ + (p-1) (|u|/v)^p |∇v|^p_A
//! ```
//!
//! Second order (Euclidean Laplacian, `-Δv > 0`):
//!
//! ```text
//! R₁ = |Δ|u||^p - Δ(|u|^p / v^{p-1}) |Δv|^{p-2} Δv
//! L₁ = |Δ|u||^p - p (|u|/v)^{p-1} Δ|u| |Δv|^{p-2} Δv + (p-1) (|u|/v)^p |Δv|^p
//!      - p(p-1) (|u|^{p-2} / v^{p-1}) |Δv|^{p-2} Δv |∇|u| - (|u|/v) ∇v|²
//! ```
//!
//! `R` differentiates the quotient `|u|^p / v^{p-1}` directly, so `R` and
//! `L` are computed along different paths. Complex `u` enters through
//! `|u|`; its gradient norm is `|∇ Re u|² + |∇ Im u|²`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fd;
use crate::geometry::{a_inner, Geometry, GeometryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PiconeError {
    #[error("v({x:?}) = {value} is not positive")]
    VNotPositive { x: Vec<f64>, value: f64 },
    #[error("non-finite evaluation near {x:?}")]
    NonFinite { x: Vec<f64> },
    #[error("|u| vanishes or changes sign across the stencil at {x:?}")]
    ModulusNotSmooth { x: Vec<f64> },
    #[error("-Δv = {neg_lap_v} <= 0 at {x:?}; L₁ >= 0 is not guaranteed")]
    HypothesisViolation { x: Vec<f64>, neg_lap_v: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A real or complex test function.
#[derive(Clone, Copy)]
pub enum TestFn<'a> {
    Real(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
    Complex(&'a (dyn Fn(&[f64]) -> Complex64 + Sync)),
}

impl TestFn<'_> {
    fn modulus(&self, x: &[f64]) -> f64 {
        match self {
            TestFn::Real(f) => f(x).abs(),
            TestFn::Complex(f) => f(x).norm(),
        }
    }

    /// Coordinate gradients of the real and imaginary parts.
    fn gradients(&self, x: &[f64], h: f64) -> Vec<Vec<f64>> {
        match self {
            TestFn::Real(f) => vec![fd::gradient(*f, x, h)],
            TestFn::Complex(f) => {
                let re = |y: &[f64]| f(y).re;
                let im = |y: &[f64]| f(y).im;
                vec![fd::gradient(&re, x, h), fd::gradient(&im, x, h)]
            }
        }
    }

    /// `|u|` is differentiable across the stencil of half-width `h` around `x`.
    fn smooth_modulus(&self, x: &[f64], h: f64) -> bool {
        let mut y = x.to_vec();
        let mut pts = vec![x.to_vec()];
        for j in 0..x.len() {
            for s in [-1.0, 1.0] {
                y[j] = x[j] + s * h;
                pts.push(y.clone());
            }
            y[j] = x[j];
        }
        match self {
            TestFn::Real(f) => {
                let s0 = f(x).signum();
                pts.iter().all(|p| {
                    let v = f(p);
                    v.abs() >= 1e-12 && v.signum() == s0
                })
            }
            TestFn::Complex(f) => pts.iter().all(|p| f(p).norm() >= 1e-12),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderTerms {
    pub grad_u_p: f64,
    pub cross: f64,
    pub v_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiconeSample {
    pub x: Vec<f64>,
    pub r: f64,
    pub l: f64,
    pub terms: FirstOrderTerms,
    pub h: f64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiconeSecondSample {
    pub x: Vec<f64>,
    pub r1: f64,
    pub l1: f64,
    pub neg_lap_v: f64,
    pub terms: [f64; 4],
    pub h: f64,
    pub error_bound: f64,
}

fn finite(x: &[f64], vals: &[f64]) -> Result<(), PiconeError> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(PiconeError::NonFinite { x: x.to_vec() })
    }
}

/// `|ξ|^{e}` with `0^e = 0` for every exponent.
fn norm_pow(sq: f64, e: f64) -> f64 {
    if sq == 0.0 {
        0.0
    } else {
        sq.powf(e / 2.0)
    }
}

/// Both sides of the first-order identity at `x`; `h = None` picks
/// `eps^{1/3} max(1, |x|_∞)`.
pub fn picone_first(
    g: &Geometry,
    u: TestFn<'_>,
    v: &(dyn Fn(&[f64]) -> f64 + Sync),
    p: f64,
    x: &[f64],
    h: Option<f64>,
) -> Result<PiconeSample, PiconeError> {
    if !(p > 1.0) {
        return Err(PiconeError::Invalid(format!("p = {p}")));
    }
    if x.len() != g.ambient_dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: g.ambient_dim(),
            got: x.len(),
        }
        .into());
    }
    let h = h.unwrap_or_else(|| fd::first_order_step(x));
    let v0 = v(x);
    if !(v0 > 0.0) {
        return Err(PiconeError::VNotPositive {
            x: x.to_vec(),
            value: v0,
        });
    }
    if !u.smooth_modulus(x, h) {
        return Err(PiconeError::ModulusNotSmooth { x: x.to_vec() });
    }
    let m = u.modulus(x);
    let grads_u = u.gradients(x, h);
    let grad_v = fd::gradient(v, x, h);
    let modulus = |y: &[f64]| u.modulus(y);
    let grad_m = fd::gradient(&modulus, x, h);
    let quotient = |y: &[f64]| u.modulus(y).powf(p) / v(y).powf(p - 1.0);
    let grad_q = fd::gradient(&quotient, x, h);
    for gr in grads_u.iter().chain([&grad_v, &grad_m, &grad_q]) {
        finite(x, gr)?;
    }

    let gu2: f64 = grads_u.iter().map(|gr| a_inner(g, x, gr, gr)).sum();
    let gv2 = a_inner(g, x, &grad_v, &grad_v);
    let grad_u_p = norm_pow(gu2, p);
    let gv_pm2 = norm_pow(gv2, p - 2.0);
    let ratio = m / v0;
    let cross = p * ratio.powf(p - 1.0) * gv_pm2 * a_inner(g, x, &grad_m, &grad_v);
    let v_term = (p - 1.0) * ratio.powf(p) * norm_pow(gv2, p);
    let l = grad_u_p - cross + v_term;
    let r = grad_u_p - gv_pm2 * a_inner(g, x, &grad_q, &grad_v);
    finite(x, &[l, r])?;
    let scale = 1.0 + grad_u_p.abs() + cross.abs() + v_term.abs();
    Ok(PiconeSample {
        x: x.to_vec(),
        r,
        l,
        terms: FirstOrderTerms {
            grad_u_p,
            cross,
            v_term,
        },
        h,
        error_bound: 1e3 * (h * h + f64::EPSILON / h) * scale,
    })
}

/// Both sides of the second-order identity at `x ∈ ℝⁿ`; `h = None` picks
/// `eps^{1/4} max(1, |x|_∞)` for the Laplacians.
pub fn picone_second(
    u: TestFn<'_>,
    v: &(dyn Fn(&[f64]) -> f64 + Sync),
    p: f64,
    n: usize,
    x: &[f64],
    h: Option<f64>,
) -> Result<PiconeSecondSample, PiconeError> {
    if !(p > 1.0) || x.len() != n {
        return Err(PiconeError::Invalid(format!(
            "p = {p}, n = {n}, dim x = {}",
            x.len()
        )));
    }
    let h2 = h.unwrap_or_else(|| fd::second_order_step(x));
    let h1 = fd::first_order_step(x);
    let v0 = v(x);
    if !(v0 > 0.0) {
        return Err(PiconeError::VNotPositive {
            x: x.to_vec(),
            value: v0,
        });
    }
    let lap_v = fd::laplacian(v, x, h2);
    finite(x, &[lap_v])?;
    if !(-lap_v > 0.0) {
        return Err(PiconeError::HypothesisViolation {
            x: x.to_vec(),
            neg_lap_v: -lap_v,
        });
    }
    if !u.smooth_modulus(x, h2.max(h1)) {
        return Err(PiconeError::ModulusNotSmooth { x: x.to_vec() });
    }
    let m = u.modulus(x);
    let modulus = |y: &[f64]| u.modulus(y);
    let lap_m = fd::laplacian(&modulus, x, h2);
    let quotient = |y: &[f64]| u.modulus(y).powf(p) / v(y).powf(p - 1.0);
    let lap_q = fd::laplacian(&quotient, x, h2);
    let grad_m = fd::gradient(&modulus, x, h1);
    let grad_v = fd::gradient(v, x, h1);
    finite(x, &[lap_m, lap_q])?;
    finite(x, &grad_m)?;
    finite(x, &grad_v)?;

    let ratio = m / v0;
    let lv_pm2 = lap_v.abs().powf(p - 2.0) * lap_v;
    let diff_sq: f64 = grad_m
        .iter()
        .zip(&grad_v)
        .map(|(a, b)| (a - ratio * b).powi(2))
        .sum();
    let t0 = lap_m.abs().powf(p);
    let t1 = p * ratio.powf(p - 1.0) * lap_m * lv_pm2;
    let t2 = (p - 1.0) * ratio.powf(p) * lap_v.abs().powf(p);
    let t3 = p * (p - 1.0) * m.powf(p - 2.0) / v0.powf(p - 1.0) * lv_pm2 * diff_sq;
    let l1 = t0 - t1 + t2 - t3;
    let r1 = t0 - lap_q * lv_pm2;
    finite(x, &[l1, r1])?;
    let scale = 1.0 + t0.abs() + t1.abs() + t2.abs() + t3.abs();
    Ok(PiconeSecondSample {
        x: x.to_vec(),
        r1,
        l1,
        neg_lap_v: -lap_v,
        terms: [t0, t1, t2, t3],
        h: h2,
        error_bound: 1e3 * (h2 * h2 + f64::EPSILON / (h2 * h2)) * scale,
    })
}

/// `(|∇|u||_A, |∇u|_A)` for complex `u`; the first never exceeds the second.
pub fn modulus_chain_check(
    g: &Geometry,
    u: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    x: &[f64],
    h: Option<f64>,
) -> Result<(f64, f64), PiconeError> {
    let h = h.unwrap_or_else(|| fd::first_order_step(x));
    let tf = TestFn::Complex(u);
    if !tf.smooth_modulus(x, h) {
        return Err(PiconeError::ModulusNotSmooth { x: x.to_vec() });
    }
    let modulus = |y: &[f64]| u(y).norm();
    let gm = fd::gradient(&modulus, x, h);
    let gu: f64 = tf
        .gradients(x, h)
        .iter()
        .map(|gr| a_inner(g, x, gr, gr))
        .sum();
    Ok((a_inner(g, x, &gm, &gm).max(0.0).sqrt(), gu.max(0.0).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub count: usize,
    pub evaluated: usize,
    pub skipped: usize,
    /// Largest `|R - L| / (1 + |R|)`.
    pub max_rel_diff: f64,
    pub min_l: f64,
    pub tolerance: f64,
    pub violations: Vec<Vec<f64>>,
    pub errors: Vec<String>,
}

/// Point, relative `|R - L|` and `L` of one evaluated sample.
type SampleOutcome = (Vec<f64>, f64, f64);

impl SweepSummary {
    fn collect(
        count: usize,
        tolerance: f64,
        results: Vec<Result<SampleOutcome, PiconeError>>,
    ) -> Self {
        let mut s = SweepSummary {
            count,
            evaluated: 0,
            skipped: 0,
            max_rel_diff: 0.0,
            min_l: f64::INFINITY,
            tolerance,
            violations: Vec::new(),
            errors: Vec::new(),
        };
        for res in results {
            match res {
                Ok((x, r, l)) => {
                    s.evaluated += 1;
                    s.max_rel_diff = s.max_rel_diff.max((r - l).abs() / (1.0 + r.abs()));
                    s.min_l = s.min_l.min(l);
                    if l < -tolerance {
                        s.violations.push(x);
                    }
                }
                Err(PiconeError::ModulusNotSmooth { .. }) => s.skipped += 1,
                Err(e) => s.errors.push(e.to_string()),
            }
        }
        s
    }
}

/// Uniform points in `[-half_width, half_width]^dim`.
pub fn sample_points(dim: usize, count: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| rng.gen_range(-half_width..half_width))
                .collect()
        })
        .collect()
}

/// First-order identity for fixed `(u, v)` over the given points.
pub fn picone_sweep(
    g: &Geometry,
    u: TestFn<'_>,
    v: &(dyn Fn(&[f64]) -> f64 + Sync),
    p: f64,
    points: &[Vec<f64>],
    tolerance: f64,
) -> SweepSummary {
    let results = points
        .par_iter()
        .map(|x| picone_first(g, u, v, p, x, None).map(|s| (s.x, s.r, s.l)))
        .collect();
    SweepSummary::collect(points.len(), tolerance, results)
}

/// Second-order identity for fixed `(u, v)` over the given points.
pub fn picone_second_sweep(
    u: TestFn<'_>,
    v: &(dyn Fn(&[f64]) -> f64 + Sync),
    p: f64,
    n: usize,
    points: &[Vec<f64>],
    tolerance: f64,
) -> SweepSummary {
    let results = points
        .par_iter()
        .map(|x| picone_second(u, v, p, n, x, None).map(|s| (s.x, s.r1, s.l1)))
        .collect();
    SweepSummary::collect(points.len(), tolerance, results)
}

/// Random smooth pair: `u` a damped three-term trigonometric sum, `v` the
/// exponential of a bounded trigonometric sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothPair {
    pub u_amp: [f64; 3],
    pub u_freq: [Vec<f64>; 3],
    pub u_phase: [f64; 3],
    pub v_amp: f64,
    pub v_freq: Vec<f64>,
    pub v_phase: f64,
}

impl SmoothPair {
    pub fn random(dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let vec = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect()
        };
        let u_freq = [vec(rng), vec(rng), vec(rng)];
        let v_freq = vec(rng);
        SmoothPair {
            u_amp: [
                rng.gen_range(0.5..1.5),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ],
            u_freq,
            u_phase: [
                rng.gen_range(0.0..6.3),
                rng.gen_range(0.0..6.3),
                rng.gen_range(0.0..6.3),
            ],
            v_amp: rng.gen_range(0.1..0.8),
            v_freq,
            v_phase: rng.gen_range(0.0..6.3),
        }
    }

    fn dot(a: &[f64], x: &[f64]) -> f64 {
        a.iter().zip(x).map(|(p, q)| p * q).sum()
    }

    pub fn u(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s: f64 = (0..3)
            .map(|j| self.u_amp[j] * (Self::dot(&self.u_freq[j], x) + self.u_phase[j]).cos())
            .sum();
        s * (-r2 / 8.0).exp()
    }

    /// Complex companion: `u + i ũ` with `ũ` the phase-shifted sum.
    pub fn u_complex(&self, x: &[f64]) -> Complex64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let s: f64 = (0..3)
            .map(|j| self.u_amp[j] * (Self::dot(&self.u_freq[j], x) + self.u_phase[j]).sin())
            .sum();
        Complex64::new(self.u(x), s * (-r2 / 8.0).exp())
    }

    pub fn v(&self, x: &[f64]) -> f64 {
        (self.v_amp * (Self::dot(&self.v_freq, x) + self.v_phase).sin()).exp()
    }
}

/// Positive superharmonic function on `ℝⁿ`: a positive combination of
/// `(1 + |x - c|²/σ²)^{-s}` with `0 < s <= (n-2)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperharmonicBumps {
    pub weights: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    pub widths: Vec<f64>,
    pub powers: Vec<f64>,
}

impl SuperharmonicBumps {
    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let s_max = (n as f64 - 2.0) / 2.0;
        let k = 2;
        SuperharmonicBumps {
            weights: (0..k).map(|_| rng.gen_range(0.5..2.0)).collect(),
            centers: (0..k)
                .map(|_| (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect())
                .collect(),
            widths: (0..k).map(|_| rng.gen_range(0.5..1.5)).collect(),
            powers: (0..k).map(|_| rng.gen_range(0.2 * s_max..s_max)).collect(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (0..self.weights.len())
            .map(|j| {
                let d2: f64 = x
                    .iter()
                    .zip(&self.centers[j])
                    .map(|(a, c)| (a - c).powi(2))
                    .sum();
                self.weights[j]
                    * (1.0 + d2 / (self.widths[j] * self.widths[j])).powf(-self.powers[j])
            })
            .sum()
    }
}

/// First-order identity over `count` random `(u, v, x)` triples; points lie
/// in `[-1.5, 1.5]^n`.
pub fn random_first_order_sweep(
    g: &Geometry,
    p: f64,
    count: usize,
    seed: u64,
    complex: bool,
    tolerance: f64,
) -> SweepSummary {
    let dim = g.ambient_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(SmoothPair, Vec<f64>)> = (0..count)
        .map(|_| {
            let pair = SmoothPair::random(dim, &mut rng);
            let x = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
            (pair, x)
        })
        .collect();
    let results = cases
        .par_iter()
        .map(|(pair, x)| {
            let v = |y: &[f64]| pair.v(y);
            let ur = |y: &[f64]| pair.u(y);
            let uc = |y: &[f64]| pair.u_complex(y);
            let u = if complex {
                TestFn::Complex(&uc)
            } else {
                TestFn::Real(&ur)
            };
            picone_first(g, u, &v, p, x, None).map(|s| (s.x, s.r, s.l))
        })
        .collect();
    SweepSummary::collect(count, tolerance, results)
}

/// Second-order identity over `count` random triples on `ℝⁿ` with
/// superharmonic `v`; points lie in `[-1.5, 1.5]^n`.
pub fn random_second_order_sweep(
    n: usize,
    p: f64,
    count: usize,
    seed: u64,
    tolerance: f64,
) -> SweepSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(SmoothPair, SuperharmonicBumps, Vec<f64>)> = (0..count)
        .map(|_| {
            let pair = SmoothPair::random(n, &mut rng);
            let v = SuperharmonicBumps::random(n, &mut rng);
            let x = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            (pair, v, x)
        })
        .collect();
    let results = cases
        .par_iter()
        .map(|(pair, bumps, x)| {
            let v = |y: &[f64]| bumps.eval(y);
            let u = |y: &[f64]| pair.u(y);
            picone_second(TestFn::Real(&u), &v, p, n, x, None).map(|s| (s.x, s.r1, s.l1))
        })
        .collect();
    SweepSummary::collect(count, tolerance, results)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(x: &[f64]) -> f64 {
        (-x.iter().map(|v| v * v).sum::<f64>()).exp()
    }

    #[test]
    fn equality_case_u_equals_cv() {
        let g = Geometry::Euclidean { n: 3 };
        for c in [1.0, 2.0, 10.0] {
            let u = move |x: &[f64]| c * gauss(x);
            let s =
                picone_first(&g, TestFn::Real(&u), &gauss, 2.0, &[1.0, 1.0, 1.0], None).unwrap();
            assert!(s.l.abs() <= 1e-8 * c * c, "{c}: {s:?}");
            assert!((s.r - s.l).abs() <= 1e-8 * c * c);
        }
    }

    #[test]
    fn heisenberg_example() {
        let u = |x: &[f64]| x[0] * x[1];
        let v = |x: &[f64]| 1.0 + x.iter().map(|t| t * t).sum::<f64>();
        let s = picone_first(
            &Geometry::Heisenberg1,
            TestFn::Real(&u),
            &v,
            2.0,
            &[1.0, 2.0, 1.0],
            None,
        )
        .unwrap();
        assert!((s.r - s.l).abs() <= 1e-7 && s.l >= -1e-9, "{s:?}");
        assert!((s.r - s.l).abs() <= s.error_bound);
    }

    #[test]
    fn non_positive_v_is_rejected() {
        let u = |x: &[f64]| x[0];
        let v = |x: &[f64]| x[1];
        let e = picone_first(
            &Geometry::Euclidean { n: 2 },
            TestFn::Real(&u),
            &v,
            2.0,
            &[1.0, -1.0],
            None,
        );
        assert!(matches!(e, Err(PiconeError::VNotPositive { .. })));
    }

    fn radial_pow(a: f64) -> impl Fn(&[f64]) -> f64 + Sync {
        move |x: &[f64]| x.iter().map(|t| t * t).sum::<f64>().powf(a / 2.0)
    }

    fn point_with_norm(r: f64) -> Vec<f64> {
        let s = r / 3f64.sqrt();
        vec![s, s, s, 0.0, 0.0]
    }

    #[test]
    fn second_order_examples() {
        let v = radial_pow(-0.5);
        let s = picone_second(TestFn::Real(&v), &v, 2.0, 5, &point_with_norm(2.0), None).unwrap();
        assert!(s.l1.abs() <= 1e-6, "{s:?}");
        assert!(s.neg_lap_v > 0.0);

        let s = picone_second(
            TestFn::Real(&gauss),
            &v,
            2.0,
            5,
            &point_with_norm(1.5),
            None,
        )
        .unwrap();
        assert!((s.r1 - s.l1).abs() <= 1e-5 * (1.0 + s.r1.abs()), "{s:?}");
        assert!(s.l1 >= -1e-7);

        let bad = radial_pow(2.0);
        let e = picone_second(
            TestFn::Real(&gauss),
            &bad,
            2.0,
            5,
            &point_with_norm(1.0),
            None,
        );
        assert!(matches!(e, Err(PiconeError::HypothesisViolation { .. })));
    }

    #[test]
    fn sweeps() {
        let g = Geometry::Euclidean { n: 3 };
        let pts = sample_points(3, 100, 1.5, 11);
        let s = picone_sweep(&g, TestFn::Real(&gauss), &gauss, 2.0, &pts, 1e-9);
        assert_eq!(s.evaluated, 100);
        assert!(s.min_l >= -1e-9 && s.max_rel_diff <= 1e-7, "{s:?}");

        let s = random_first_order_sweep(&g, 2.0, 100, 3, false, 1e-7);
        assert!(s.violations.is_empty() && s.errors.is_empty(), "{s:?}");
        let s = random_first_order_sweep(&Geometry::Heisenberg1, 3.0, 100, 4, false, 1e-6);
        assert!(s.violations.is_empty() && s.errors.is_empty(), "{s:?}");
        assert!(s.evaluated >= 90);
    }

    #[test]
    fn complex_modulus_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let pair = SmoothPair::random(3, &mut rng);
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let u = |y: &[f64]| pair.u_complex(y);
            let (gm, gu) = modulus_chain_check(&Geometry::Heisenberg1, &u, &x, None).unwrap();
            assert!(gm <= gu + 1e-8);
        }
    }
}
