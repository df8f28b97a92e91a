//! Radial test profiles `f(r)` with analytic first and second derivatives.
//!
//! The cutoff `χ` of the Gaussian family equals one on `[0, R/2]`, vanishes
//! from `R` on and is the quintic smoothstep in between, so profiles are
//! `C²`. Near-extremal profiles `r^{κ+ε}` use a logarithmic cutoff between
//! `ρR` and `R`, which keeps the cutoff energy small against the `1/ε`
//! growth of both integrals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("invalid profile parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestProfile {
    /// `(1 - (r/R)^β)_+^k`.
    Bump {
        beta: f64,
        k: f64,
        radius: f64,
    },
    /// `exp(-r²/2σ²) χ(r)`.
    Gaussian {
        sigma: f64,
        radius: f64,
    },
    /// `r^{critical + ε} χ_log(r)` with the logarithmic cutoff starting at
    /// `inner * radius`.
    NearExtremal {
        epsilon: f64,
        critical: f64,
        radius: f64,
        #[serde(default = "default_inner")]
        inner: f64,
    },
    Zero {
        radius: f64,
    },
}

fn default_inner() -> f64 {
    1e-2
}

/// Smoothstep `S(t) = 6t⁵ - 15t⁴ + 10t³` and two derivatives, clamped.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let t2 = t * t;
        (
            t2 * t * (10.0 + t * (-15.0 + 6.0 * t)),
            30.0 * t2 * (1.0 - t) * (1.0 - t),
            60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
        )
    }
}

/// Cutoff equal to 1 on `[0, R/2]` and 0 on `[R, ∞)`.
fn cutoff(r: f64, radius: f64) -> (f64, f64, f64) {
    let half = radius / 2.0;
    let (s, s1, s2) = smoothstep((r - half) / half);
    (1.0 - s, -s1 / half, -s2 / (half * half))
}

/// Cutoff equal to 1 on `[0, ρR]` and 0 on `[R, ∞)`, smooth in `log r`.
fn log_cutoff(r: f64, radius: f64, inner: f64) -> (f64, f64, f64) {
    let len = (1.0 / inner).ln();
    let t = (radius / r).ln() / len;
    let (s, s1, s2) = smoothstep(t);
    (s, -s1 / (r * len), (s2 / len + s1) / (r * r * len))
}

impl TestProfile {
    pub fn radius(&self) -> f64 {
        match *self {
            TestProfile::Bump { radius, .. }
            | TestProfile::Gaussian { radius, .. }
            | TestProfile::NearExtremal { radius, .. }
            | TestProfile::Zero { radius } => radius,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TestProfile::Zero { .. })
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let bad = |m: String| Err(ProfileError::Invalid(m));
        let radius = self.radius();
        if !(radius > 0.0 && radius.is_finite()) {
            return bad(format!("radius = {radius}"));
        }
        match *self {
            TestProfile::Bump { beta, k, .. } => {
                if !(beta > 0.0 && k >= 1.0) {
                    return bad(format!(
                        "bump needs β > 0 and k >= 1, got β = {beta}, k = {k}"
                    ));
                }
            }
            TestProfile::Gaussian { sigma, .. } => {
                if !(sigma > 0.0) {
                    return bad(format!("σ = {sigma}"));
                }
            }
            TestProfile::NearExtremal {
                epsilon,
                inner,
                critical,
                ..
            } => {
                if !(epsilon > 0.0) {
                    return bad(format!("near-extremal profiles need ε > 0, got {epsilon}"));
                }
                if !(inner > 0.0 && inner < 1.0) || !critical.is_finite() {
                    return bad(format!("inner = {inner}, critical = {critical}"));
                }
            }
            TestProfile::Zero { .. } => {}
        }
        Ok(())
    }

    /// `(f, f', f'')` at `r > 0`.
    pub fn eval(&self, r: f64) -> (f64, f64, f64) {
        if r >= self.radius() {
            return (0.0, 0.0, 0.0);
        }
        match *self {
            TestProfile::Bump { beta, k, radius } => {
                let u = (r / radius).powf(beta);
                let u1 = beta * u / r;
                let u2 = beta * (beta - 1.0) * u / (r * r);
                let base = 1.0 - u;
                let f = base.powf(k);
                let f1 = -k * base.powf(k - 1.0) * u1;
                let f2 = if k == 1.0 {
                    -u2
                } else {
                    k * (k - 1.0) * base.powf(k - 2.0) * u1 * u1 - k * base.powf(k - 1.0) * u2
                };
                (f, f1, f2)
            }
            TestProfile::Gaussian { sigma, radius } => {
                let s2 = sigma * sigma;
                let g = (-r * r / (2.0 * s2)).exp();
                let g1 = -r / s2 * g;
                let g2 = (r * r / (s2 * s2) - 1.0 / s2) * g;
                let (c, c1, c2) = cutoff(r, radius);
                (g * c, g1 * c + g * c1, g2 * c + 2.0 * g1 * c1 + g * c2)
            }
            TestProfile::NearExtremal {
                epsilon,
                critical,
                radius,
                inner,
            } => {
                let m = critical + epsilon;
                let g = r.powf(m);
                let g1 = m * g / r;
                let g2 = m * (m - 1.0) * g / (r * r);
                let (c, c1, c2) = log_cutoff(r, radius, inner);
                (g * c, g1 * c + g * c1, g2 * c + 2.0 * g1 * c1 + g * c2)
            }
            TestProfile::Zero { .. } => (0.0, 0.0, 0.0),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.eval(r).1
    }

    /// Points where the profile switches formula; used as quadrature breaks.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            TestProfile::Gaussian { radius, .. } => vec![radius / 2.0],
            TestProfile::NearExtremal { radius, inner, .. } => vec![inner * radius],
            _ => Vec::new(),
        }
    }

    /// Profile of `r ↦ f(λr)` up to a constant factor.
    pub fn dilated(&self, lambda: f64) -> TestProfile {
        match *self {
            TestProfile::Bump { beta, k, radius } => TestProfile::Bump {
                beta,
                k,
                radius: radius / lambda,
            },
            TestProfile::Gaussian { sigma, radius } => TestProfile::Gaussian {
                sigma: sigma / lambda,
                radius: radius / lambda,
            },
            TestProfile::NearExtremal {
                epsilon,
                critical,
                radius,
                inner,
            } => TestProfile::NearExtremal {
                epsilon,
                critical,
                radius: radius / lambda,
                inner,
            },
            TestProfile::Zero { radius } => TestProfile::Zero {
                radius: radius / lambda,
            },
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            TestProfile::Bump { beta, k, radius } => format!("bump(β={beta}, k={k}, R={radius})"),
            TestProfile::Gaussian { sigma, radius } => format!("gaussian(σ={sigma}, R={radius})"),
            TestProfile::NearExtremal {
                epsilon,
                critical,
                radius,
                inner,
            } => format!("near-extremal(κ={critical}, ε={epsilon}, R={radius}, ρ={inner})"),
            TestProfile::Zero { radius } => format!("zero(R={radius})"),
        }
    }
}

/// Critical Hardy exponent `-(Q-p)/p`.
pub fn hardy_critical_exponent(q: f64, p: f64) -> f64 {
    -(q - p) / p
}

/// Critical Rellich exponent `-(n-2p)/p`.
pub fn rellich_critical_exponent(n: f64, p: f64) -> f64 {
    -(n - 2.0 * p) / p
}

/// Bumps, Gaussians and near-extremal profiles supported in `[0, R]`.
pub fn default_family(critical: f64, radius: f64) -> Vec<TestProfile> {
    vec![
        TestProfile::Bump {
            beta: 2.0,
            k: 2.0,
            radius,
        },
        TestProfile::Bump {
            beta: 2.0,
            k: 3.0,
            radius,
        },
        TestProfile::Bump {
            beta: 1.0,
            k: 3.0,
            radius,
        },
        TestProfile::Gaussian {
            sigma: 0.25 * radius,
            radius,
        },
        TestProfile::Gaussian {
            sigma: 0.5 * radius,
            radius,
        },
        TestProfile::NearExtremal {
            epsilon: 0.5,
            critical,
            radius,
            inner: default_inner(),
        },
        TestProfile::NearExtremal {
            epsilon: 0.05,
            critical,
            radius,
            inner: default_inner(),
        },
    ]
}

/// Twice-differentiable members of [`default_family`] without the
/// near-extremal ones.
pub fn smooth_family(radius: f64) -> Vec<TestProfile> {
    vec![
        TestProfile::Bump {
            beta: 2.0,
            k: 3.0,
            radius,
        },
        TestProfile::Bump {
            beta: 2.0,
            k: 4.0,
            radius,
        },
        TestProfile::Gaussian {
            sigma: 0.25 * radius,
            radius,
        },
        TestProfile::Gaussian {
            sigma: 0.5 * radius,
            radius,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::derivs5;

    fn check_derivatives(p: &TestProfile, radii: &[f64]) {
        for &r in radii {
            let (_, d1, d2) = p.eval(r);
            let f = |s: f64| p.value(s);
            let h = 1e-3 * r;
            let (n1, n2) = derivs5(&f, r, h);
            let scale = 1.0 + d1.abs() + d2.abs();
            assert!((n1 - d1).abs() < 1e-6 * scale, "{p:?} r={r}: {n1} vs {d1}");
            assert!((n2 - d2).abs() < 1e-5 * scale, "{p:?} r={r}: {n2} vs {d2}");
        }
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let radii = [0.05, 0.2, 0.45, 0.6, 0.75, 0.9, 0.97];
        for p in default_family(-0.5, 1.0) {
            check_derivatives(&p, &radii);
        }
        check_derivatives(
            &TestProfile::Bump {
                beta: 1.5,
                k: 1.0,
                radius: 1.0,
            },
            &radii,
        );
    }

    #[test]
    fn cutoffs_are_flat_at_the_ends() {
        let g = TestProfile::Gaussian {
            sigma: 10.0,
            radius: 2.0,
        };
        assert_eq!(g.value(2.0), 0.0);
        assert_eq!(g.value(0.9), (-0.81f64 / 200.0).exp());
        let (f, d1, d2) = g.eval(2.0 - 1e-9);
        assert!(f.abs() < 1e-20 && d1.abs() < 1e-12 && d2.abs() < 1e-5);

        let n = TestProfile::NearExtremal {
            epsilon: 0.1,
            critical: -0.5,
            radius: 1.0,
            inner: 0.01,
        };
        assert_eq!(n.value(0.005), 0.005f64.powf(-0.4));
        assert_eq!(n.value(1.0), 0.0);
    }

    #[test]
    fn validation() {
        assert!(TestProfile::NearExtremal {
            epsilon: 0.0,
            critical: -0.5,
            radius: 1.0,
            inner: 0.01
        }
        .validate()
        .is_err());
        assert!(TestProfile::Bump {
            beta: 2.0,
            k: 2.0,
            radius: -1.0
        }
        .validate()
        .is_err());
        for p in default_family(-1.0, 1.0) {
            p.validate().unwrap();
        }
    }

    #[test]
    fn serde_shape() {
        let p: TestProfile =
            serde_json::from_str(r#"{"family":"bump","beta":2,"k":2,"radius":1}"#).unwrap();
        assert_eq!(
            p,
            TestProfile::Bump {
                beta: 2.0,
                k: 2.0,
                radius: 1.0
            }
        );
        assert!(serde_json::from_str::<TestProfile>(r#"{"family":"bump","beta":2}"#).is_err());
    }
}
