//! The radial quasilinear equation
//! `(r^{Q-1} W |v'|^{p-2} v')' + r^{Q-1} H |v|^{p-2} v = 0`
//! in flux form
//!
//! ```text
//! y  = r^{Q-1} W |v'|^{p-2} v'
//! v' = sign(y) (|y| / (r^{Q-1} W))^{1/(p-1)}
//! y' = -r^{Q-1} H |v|^{p-2} v
//! ```
//!
//! integrated with the Dormand-Prince 5(4) pair and its continuous
//! extension. Sign changes of `v` are located by bisection on the dense
//! output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fd::first_derivative_weights;
use crate::weight::{WeightError, WeightFn};

const OVERFLOW_GUARD: f64 = 1e150;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("step size underflow at r = {r} (h = {h})")]
    StepUnderflow { r: f64, h: f64 },
    #[error("solution exceeded {OVERFLOW_GUARD:e} at r = {r}")]
    Overflow { r: f64 },
    #[error("step limit reached at r = {r}")]
    TooManySteps { r: f64 },
    #[error("H({r}) = {value} is negative")]
    NegativePotential { r: f64, value: f64 },
    #[error(transparent)]
    Weight(#[from] WeightError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub tol: f64,
    /// Upper bound on `h / r`.
    pub max_step_rel: f64,
    pub stop_at_zero: bool,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        OdeOptions {
            tol,
            max_step_rel: 0.02,
            stop_at_zero: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub min_step: f64,
    pub max_step: f64,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub grid: Vec<f64>,
    pub v: Vec<f64>,
    pub v_prime: Vec<f64>,
    pub flux: Vec<f64>,
    pub positive: bool,
    pub first_zero: Option<f64>,
    pub step_stats: StepStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityScan {
    pub positive_on_range: bool,
    pub first_zero: Option<f64>,
    pub r_end: f64,
}

fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

struct System<'a> {
    w: &'a WeightFn,
    h: &'a WeightFn,
    p: f64,
    q: f64,
}

impl System<'_> {
    fn coefficient(&self, r: f64) -> Result<f64, OdeError> {
        Ok(r.powf(self.q - 1.0) * self.w.eval(r)?)
    }

    fn potential(&self, r: f64) -> Result<f64, OdeError> {
        let value = self.h.eval_raw(r)?;
        if value < 0.0 {
            return Err(OdeError::NegativePotential { r, value });
        }
        Ok(r.powf(self.q - 1.0) * value)
    }

    fn v_prime(&self, r: f64, y: f64) -> Result<f64, OdeError> {
        Ok(signed_pow(y / self.coefficient(r)?, 1.0 / (self.p - 1.0)))
    }

    fn rhs(&self, r: f64, s: [f64; 2]) -> Result<[f64; 2], OdeError> {
        let dv = self.v_prime(r, s[1])?;
        let pot = self.potential(r)?;
        let dy = if pot == 0.0 {
            0.0
        } else {
            -pot * signed_pow(s[0], self.p - 1.0)
        };
        Ok([dv, dy])
    }
}

// Dormand-Prince 5(4)
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension over one accepted step.
struct Dense {
    r: f64,
    h: f64,
    c: [[f64; 2]; 5],
}

impl Dense {
    fn eval(&self, theta: f64, i: usize) -> f64 {
        let t1 = 1.0 - theta;
        let c = &self.c;
        c[0][i] + theta * (c[1][i] + t1 * (c[2][i] + theta * (c[3][i] + t1 * c[4][i])))
    }
}

fn comb(y: [f64; 2], h: f64, terms: &[(f64, [f64; 2])]) -> [f64; 2] {
    let mut out = y;
    for (a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// Integrates from `r0` to `r1` with `v(r0) = v0`, `v'(r0) = dv0`.
#[allow(clippy::too_many_arguments)]
pub fn solve_radial(
    w: &WeightFn,
    h: &WeightFn,
    p: f64,
    q: f64,
    r0: f64,
    r1: f64,
    v0: f64,
    dv0: f64,
    tol: f64,
) -> Result<RadialSolution, OdeError> {
    solve_radial_with(w, h, p, q, r0, r1, v0, dv0, &OdeOptions::with_tol(tol))
}

#[allow(clippy::too_many_arguments)]
pub fn solve_radial_with(
    w: &WeightFn,
    h: &WeightFn,
    p: f64,
    q: f64,
    r0: f64,
    r1: f64,
    v0: f64,
    dv0: f64,
    opts: &OdeOptions,
) -> Result<RadialSolution, OdeError> {
    if !(r0 > 0.0 && r1 > r0 && r1.is_finite()) {
        return Err(OdeError::InvalidInput(format!(
            "need 0 < r0 < r1, got [{r0}, {r1}]"
        )));
    }
    if !(v0 > 0.0 && v0.is_finite()) || !dv0.is_finite() {
        return Err(OdeError::InvalidInput(format!(
            "need v0 > 0, got v0 = {v0}, dv0 = {dv0}"
        )));
    }
    if !(p > 1.0 && p.is_finite()) || !q.is_finite() {
        return Err(OdeError::InvalidInput(format!("p = {p}, Q = {q}")));
    }
    if !(opts.tol > 0.0) || !(opts.max_step_rel > 0.0) {
        return Err(OdeError::InvalidInput(format!("tol = {}", opts.tol)));
    }
    let sys = System { w, h, p, q };
    let tol = opts.tol;
    let coef0 = sys.coefficient(r0)?;
    let y0 = coef0 * signed_pow(dv0, p - 1.0);
    let floor = [
        1e-6 * v0,
        1e-6 * (y0.abs() + coef0 * signed_pow(v0 / r0, p - 1.0).abs()),
    ];

    let mut r = r0;
    let mut s = [v0, y0];
    let mut k1 = sys.rhs(r, s)?;
    let mut grid = vec![r0];
    let mut vs = vec![v0];
    let mut dvs = vec![k1[0]];
    let mut ys = vec![y0];
    let mut first_zero = None;
    let mut stats = StepStats {
        min_step: f64::INFINITY,
        max_step: 0.0,
        accepted: 0,
        rejected: 0,
    };
    let mut hstep = (opts.max_step_rel * r0).min(1e-2 * r0).min(r1 - r0);
    let mut last_rejected = false;

    while r < r1 {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(OdeError::TooManySteps { r });
        }
        hstep = hstep.min(opts.max_step_rel * r).min(r1 - r);
        if hstep < 1e-14 * r {
            return Err(OdeError::StepUnderflow { r, h: hstep });
        }
        let hh = hstep;
        let k2 = sys.rhs(r + C2 * hh, comb(s, hh, &[(A21, k1)]))?;
        let k3 = sys.rhs(r + C3 * hh, comb(s, hh, &[(A31, k1), (A32, k2)]))?;
        let k4 = sys.rhs(r + C4 * hh, comb(s, hh, &[(A41, k1), (A42, k2), (A43, k3)]))?;
        let k5 = sys.rhs(
            r + C5 * hh,
            comb(s, hh, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
        )?;
        let k6 = sys.rhs(
            r + hh,
            comb(
                s,
                hh,
                &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            ),
        )?;
        let s_new = comb(
            s,
            hh,
            &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        );
        let r_new = if hh == r1 - r { r1 } else { r + hh };
        let k7 = sys.rhs(r_new, s_new)?;

        let mut err = 0.0;
        for i in 0..2 {
            let e =
                hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = tol * (s[i].abs().max(s_new[i].abs()) + floor[i]);
            err += (e / sk).powi(2);
        }
        let err = (err / 2.0).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            hstep *= 0.2;
            last_rejected = true;
            continue;
        }
        if err > 1.0 {
            stats.rejected += 1;
            hstep *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
            continue;
        }

        if s_new[0].abs() > OVERFLOW_GUARD || s_new[1].abs() > OVERFLOW_GUARD {
            return Err(OdeError::Overflow { r: r_new });
        }

        if first_zero.is_none() && s[0] > 0.0 && s_new[0] <= 0.0 {
            let mut c = [[0.0; 2]; 5];
            for i in 0..2 {
                let diff = s_new[i] - s[i];
                let bspl = hh * k1[i] - diff;
                c[0][i] = s[i];
                c[1][i] = diff;
                c[2][i] = bspl;
                c[3][i] = diff - hh * k7[i] - bspl;
                c[4][i] = hh
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let dense = Dense { r, h: hh, c };
            let (mut lo, mut hi) = (0.0, 1.0);
            while (hi - lo) * dense.h > 1e-10 * r_new {
                let mid = 0.5 * (lo + hi);
                if dense.eval(mid, 0) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            first_zero = Some(if hi == 1.0 {
                r_new
            } else {
                dense.r + hi * dense.h
            });
        }

        stats.accepted += 1;
        stats.min_step = stats.min_step.min(hh);
        stats.max_step = stats.max_step.max(hh);
        r = r_new;
        s = s_new;
        k1 = k7;
        grid.push(r);
        vs.push(s[0]);
        dvs.push(k1[0]);
        ys.push(s[1]);

        if first_zero.is_some() && opts.stop_at_zero {
            break;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        hstep = if last_rejected {
            hh * fac.min(1.0)
        } else {
            hh * fac
        };
        last_rejected = false;
    }

    let positive = vs.iter().all(|v| *v > 0.0);
    if !positive && first_zero.is_none() {
        // v reached zero only at an interior extremum between nodes
        let i = vs.iter().position(|v| *v <= 0.0).unwrap();
        first_zero = Some(grid[i]);
    }
    Ok(RadialSolution {
        grid,
        v: vs,
        v_prime: dvs,
        flux: ys,
        positive,
        first_zero,
        step_stats: stats,
    })
}

/// Max over interior nodes of `|y' + r^{Q-1} H |v|^{p-2} v| / (1 + |y'|)`,
/// with `y'` from five-point differences of the stored flux.
pub fn verify_ode_residual(
    sol: &RadialSolution,
    _w: &WeightFn,
    h: &WeightFn,
    p: f64,
    q: f64,
) -> Result<f64, OdeError> {
    let n = sol.grid.len();
    if n < 5 {
        return Err(OdeError::InvalidInput(format!(
            "need at least 5 nodes, got {n}"
        )));
    }
    let mut worst = 0.0f64;
    for i in 2..n - 2 {
        let xs = &sol.grid[i - 2..=i + 2];
        let wts = first_derivative_weights(sol.grid[i], xs);
        let dy: f64 = wts
            .iter()
            .zip(&sol.flux[i - 2..=i + 2])
            .map(|(c, y)| c * y)
            .sum();
        let r = sol.grid[i];
        let pot = r.powf(q - 1.0) * h.eval_raw(r)?;
        let src = if pot == 0.0 {
            0.0
        } else {
            pot * signed_pow(sol.v[i], p - 1.0)
        };
        worst = worst.max((dy + src).abs() / (1.0 + dy.abs()));
    }
    Ok(worst)
}

/// Whether the trajectory from `(v0, dv0)` stays positive on `[r0, r_max]`.
#[allow(clippy::too_many_arguments)]
pub fn positivity_scan(
    w: &WeightFn,
    h: &WeightFn,
    p: f64,
    q: f64,
    r0: f64,
    r_max: f64,
    init: (f64, f64),
    tol: f64,
) -> Result<PositivityScan, OdeError> {
    let opts = OdeOptions {
        stop_at_zero: true,
        ..OdeOptions::with_tol(tol)
    };
    let sol = solve_radial_with(w, h, p, q, r0, r_max, init.0, init.1, &opts)?;
    Ok(PositivityScan {
        positive_on_range: sol.positive,
        first_zero: sol.first_zero,
        r_end: *sol.grid.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wf(text: &str) -> WeightFn {
        WeightFn::parse(text).unwrap()
    }

    #[test]
    fn constant_solution_without_potential() {
        for p in [1.5, 2.0, 3.0] {
            let sol = solve_radial(&wf("1"), &wf("0"), p, 3.0, 1.0, 50.0, 1.0, 0.0, 1e-10).unwrap();
            assert!(sol.positive && sol.first_zero.is_none());
            assert!(sol.v.iter().all(|v| *v == 1.0));
            let res = verify_ode_residual(&sol, &wf("1"), &wf("0"), p, 3.0).unwrap();
            assert!(res <= 1e-12);
        }
    }

    #[test]
    fn euler_equation_matches_power() {
        let sol = solve_radial(
            &wf("1"),
            &wf("pow(r, -2)"),
            2.0,
            4.0,
            1.0,
            10.0,
            1.0,
            -1.0,
            1e-10,
        )
        .unwrap();
        for (r, v) in sol.grid.iter().zip(&sol.v) {
            assert!(((v - 1.0 / r) * r).abs() < 1e-4);
        }
        assert_eq!(sol.v[0], 1.0);
        assert!(sol.grid.windows(2).all(|w| w[0] < w[1]));
        let res = verify_ode_residual(&sol, &wf("1"), &wf("pow(r, -2)"), 2.0, 4.0).unwrap();
        assert!(res <= 1e-5, "{res}");
    }

    #[test]
    fn supercritical_potential_oscillates() {
        let sol = solve_radial(
            &wf("1"),
            &wf("2 * pow(r, -2)"),
            2.0,
            4.0,
            1.0,
            1e3,
            1.0,
            0.0,
            1e-10,
        )
        .unwrap();
        assert!(!sol.positive);
        let z = sol.first_zero.unwrap();
        // v = r^{-1}(cos ln r + sin ln r) vanishes at ln r = 3π/4
        assert!(
            (z - (0.75 * std::f64::consts::PI).exp()).abs() < 1e-6,
            "{z}"
        );
    }

    #[test]
    fn corrupted_solution_is_detected() {
        let h = wf("pow(r, -2)");
        let mut sol = solve_radial(&wf("1"), &h, 2.0, 4.0, 1.0, 10.0, 1.0, -1.0, 1e-10).unwrap();
        let i = sol.grid.len() / 2;
        sol.v[i] *= 1.0 + 1e-2;
        assert!(verify_ode_residual(&sol, &wf("1"), &h, 2.0, 4.0).unwrap() > 1e-3);
    }

    #[test]
    fn scan_examples() {
        let w = wf("1");
        let scan =
            positivity_scan(&w, &wf("pow(r, -4)"), 2.0, 3.0, 2.0, 1e3, (1.0, 0.0), 1e-10).unwrap();
        assert!(scan.positive_on_range && scan.first_zero.is_none());
        let scan = positivity_scan(
            &w,
            &wf("pow(r, -2)"),
            2.0,
            4.0,
            1.0,
            1e3,
            (1.0, -1.0),
            1e-10,
        )
        .unwrap();
        assert!(scan.positive_on_range);
        let scan = positivity_scan(
            &w,
            &wf("2 * pow(r, -2)"),
            2.0,
            4.0,
            1.0,
            1e3,
            (1.0, 0.0),
            1e-10,
        )
        .unwrap();
        assert!(!scan.positive_on_range && scan.first_zero.is_some());
    }

    #[test]
    fn p_laplacian_flux_is_signed() {
        // with H = 0 the flux is a first integral
        let sol = solve_radial(&wf("1"), &wf("0"), 1.5, 3.0, 1.0, 20.0, 1.0, -0.5, 1e-10).unwrap();
        let y0 = sol.flux[0];
        assert!(y0 < 0.0);
        for y in &sol.flux {
            assert!(((y - y0) / y0).abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_inputs() {
        let w = wf("1");
        assert!(solve_radial(&w, &w, 2.0, 3.0, 2.0, 1.0, 1.0, 0.0, 1e-8).is_err());
        assert!(solve_radial(&w, &w, 2.0, 3.0, 1.0, 2.0, -1.0, 0.0, 1e-8).is_err());
        assert!(solve_radial(&w, &w, 1.0, 3.0, 1.0, 2.0, 1.0, 0.0, 1e-8).is_err());
    }
}
