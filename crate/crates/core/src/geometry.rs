//! The five model geometries: Euclidean space, the first Heisenberg group,
//! Baouendi-Grushin space, the Engel group and the Cartan group.
//!
//! Each geometry carries its matrix `A(x)` in closed form and, separately, the
//! horizontal vector fields `X_i`. The two are independent: [`gram_check`]
//! compares `A(x)` against `Σ X_i X_iᵀ`.
//!
//! Homogeneous dimensions are the standard stratification values
//! (`Q = 4` for the Heisenberg group, `7` for Engel, `10` for Cartan and
//! `k + (1+γ) l` for Grushin).
//!
//! The Grushin fields are `(∇_ξ, γ|ξ|^γ ∇_ζ)`, so `A = diag(I_k, γ²|ξ|^{2γ} I_l)`
//! and the gauge homogeneous of degree one under `(ξ, ζ) ↦ (λξ, λ^{1+γ}ζ)` is
//! `(|ξ|^{2(1+γ)} + ((1+γ)/γ)² |ζ|²)^{1/(2(1+γ))}`, for which
//! `|∇_γ d|² = |ξ|^{2γ} d^{-2γ}`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fd;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no closed-form gauge is available for {0}")]
    GaugeUnavailable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite function value near {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("invalid geometry selector `{0}`")]
    InvalidSelector(String),
    #[error("the gauge is singular at the origin")]
    AtOrigin,
}

/// A geometry from the catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Geometry {
    Euclidean { n: usize },
    Heisenberg1,
    Grushin { k: usize, l: usize, gamma: f64 },
    Engel,
    Cartan,
}

impl Geometry {
    pub fn ambient_dim(&self) -> usize {
        match *self {
            Geometry::Euclidean { n } => n,
            Geometry::Heisenberg1 => 3,
            Geometry::Grushin { k, l, .. } => k + l,
            Geometry::Engel => 4,
            Geometry::Cartan => 5,
        }
    }

    pub fn homogeneous_dim(&self) -> f64 {
        homogeneous_dim(self)
    }

    pub fn has_gauge(&self) -> bool {
        !matches!(self, Geometry::Engel | Geometry::Cartan)
    }

    /// Number of horizontal fields.
    pub fn field_count(&self) -> usize {
        match *self {
            Geometry::Euclidean { n } => n,
            Geometry::Grushin { k, l, .. } => k + l,
            Geometry::Heisenberg1 | Geometry::Engel | Geometry::Cartan => 2,
        }
    }

    /// Coefficients of the horizontal fields at `x`: row `i` holds `X_i(x)`
    /// in the coordinate basis.
    pub fn vector_fields(&self, x: &[f64]) -> Vec<Vec<f64>> {
        match *self {
            Geometry::Euclidean { n } => (0..n)
                .map(|i| {
                    let mut e = vec![0.0; n];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            Geometry::Heisenberg1 => vec![vec![1.0, 0.0, -x[1] / 2.0], vec![0.0, 1.0, x[0] / 2.0]],
            Geometry::Grushin { k, l, gamma } => {
                let xi = xi_norm(x, k);
                let c = gamma * xi.powf(gamma);
                (0..k + l)
                    .map(|i| {
                        let mut e = vec![0.0; k + l];
                        e[i] = if i < k { 1.0 } else { c };
                        e
                    })
                    .collect()
            }
            Geometry::Engel => {
                let (x1, x2, x3) = (x[0], x[1], x[2]);
                vec![
                    vec![1.0, 0.0, -x2 / 2.0, -(x3 / 2.0 - x1 * x2 / 12.0)],
                    vec![0.0, 1.0, x1 / 2.0, x1 * x1 / 12.0],
                ]
            }
            Geometry::Cartan => {
                let (x1, x2) = (x[0], x[1]);
                vec![
                    vec![1.0, 0.0, 0.0, 0.0, 0.0],
                    vec![0.0, 1.0, -x1, x1 * x1 / 2.0, x1 * x2],
                ]
            }
        }
    }

    /// `A(x)` as displayed for each geometry.
    pub fn a_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        match *self {
            Geometry::Euclidean { n } => DMatrix::identity(n, n),
            Geometry::Heisenberg1 => {
                let (x1, x2) = (x[0], x[1]);
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        1.0,
                        0.0,
                        -x2 / 2.0,
                        0.0,
                        1.0,
                        x1 / 2.0,
                        -x2 / 2.0,
                        x1 / 2.0,
                        (x1 * x1 + x2 * x2) / 4.0,
                    ],
                )
            }
            Geometry::Grushin { k, l, gamma } => {
                let xi = xi_norm(x, k);
                let c = gamma * gamma * xi.powf(2.0 * gamma);
                let mut a = DMatrix::identity(k + l, k + l);
                for j in k..k + l {
                    a[(j, j)] = c;
                }
                a
            }
            Geometry::Engel => {
                let (x1, x2, x3) = (x[0], x[1], x[2]);
                let t = x3 / 2.0 - x1 * x2 / 12.0;
                let a14 = -x3 / 2.0 + x1 * x2 / 12.0;
                let a24 = x1 * x1 / 12.0;
                let a34 = x2 / 2.0 * t + x1.powi(3) / 24.0;
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        1.0,
                        0.0,
                        -x2 / 2.0,
                        a14,
                        0.0,
                        1.0,
                        x1 / 2.0,
                        a24,
                        -x2 / 2.0,
                        x1 / 2.0,
                        (x1 * x1 + x2 * x2) / 4.0,
                        a34,
                        a14,
                        a24,
                        a34,
                        t * t + x1.powi(4) / 144.0,
                    ],
                )
            }
            Geometry::Cartan => {
                let (x1, x2) = (x[0], x[1]);
                #[rustfmt::skip]
                let m = [
                    1.0, 0.0, 0.0, 0.0, 0.0,
                    0.0, 1.0, -x1, x1 * x1 / 2.0, x1 * x2,
                    0.0, -x1, x1 * x1, -x1.powi(3) / 2.0, -x1 * x1 * x2,
                    0.0, x1 * x1 / 2.0, -x1.powi(3) / 2.0, x1.powi(4) / 4.0, x1.powi(3) * x2 / 2.0,
                    0.0, x1 * x2, -x1 * x1 * x2, x1.powi(3) * x2 / 2.0, x1 * x1 * x2 * x2,
                ];
                DMatrix::from_row_slice(5, 5, &m)
            }
        }
    }

    /// Dilation `δ_λ` for the geometries with a gauge.
    pub fn dilate(&self, x: &[f64], lambda: f64) -> Vec<f64> {
        match *self {
            Geometry::Heisenberg1 => vec![lambda * x[0], lambda * x[1], lambda * lambda * x[2]],
            Geometry::Grushin { k, gamma, .. } => x
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    if i < k {
                        lambda * v
                    } else {
                        lambda.powf(1.0 + gamma) * v
                    }
                })
                .collect(),
            Geometry::Engel => vec![
                lambda * x[0],
                lambda * x[1],
                lambda * lambda * x[2],
                lambda.powi(3) * x[3],
            ],
            Geometry::Cartan => vec![
                lambda * x[0],
                lambda * x[1],
                lambda * lambda * x[2],
                lambda.powi(3) * x[3],
                lambda.powi(3) * x[4],
            ],
            Geometry::Euclidean { .. } => x.iter().map(|v| lambda * v).collect(),
        }
    }

    /// Gauge `d(x)`.
    pub fn quasi_norm(&self, x: &[f64]) -> Result<f64, GeometryError> {
        quasi_norm(self, x)
    }

    /// `Ψ(x) = |∇d|²_A(x)` in closed form.
    pub fn psi(&self, x: &[f64]) -> Result<f64, GeometryError> {
        psi_closed(self, x)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), GeometryError> {
        if x.len() == self.ambient_dim() {
            Ok(())
        } else {
            Err(GeometryError::DimensionMismatch {
                expected: self.ambient_dim(),
                got: x.len(),
            })
        }
    }
}

fn xi_norm(x: &[f64], k: usize) -> f64 {
    x[..k].iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn zeta_sq(x: &[f64], k: usize) -> f64 {
    x[k..].iter().map(|v| v * v).sum::<f64>()
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Geometry::Euclidean { n } => write!(f, "euclidean:n={n}"),
            Geometry::Heisenberg1 => write!(f, "heisenberg1"),
            Geometry::Grushin { k, l, gamma } => write!(f, "grushin:k={k},l={l},gamma={gamma}"),
            Geometry::Engel => write!(f, "engel"),
            Geometry::Cartan => write!(f, "cartan"),
        }
    }
}

impl FromStr for Geometry {
    type Err = GeometryError;

    /// Parses selectors such as `euclidean:n=4`, `heisenberg1`,
    /// `grushin:k=1,l=1,gamma=1`, `engel`, `cartan`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GeometryError::InvalidSelector(s.to_string());
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p)),
            None => (s.trim(), None),
        };
        let mut kv = Vec::new();
        if let Some(p) = params {
            for item in p.split(',') {
                let (k, v) = item.split_once('=').ok_or_else(bad)?;
                kv.push((k.trim(), v.trim()));
            }
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let known = |keys: &[&str]| kv.iter().all(|(k, _)| keys.contains(k));
        match name {
            "euclidean" => {
                if !known(&["n"]) {
                    return Err(bad());
                }
                let n: usize = get("n").ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                Ok(Geometry::Euclidean { n })
            }
            "heisenberg1" | "engel" | "cartan" if kv.is_empty() => Ok(match name {
                "heisenberg1" => Geometry::Heisenberg1,
                "engel" => Geometry::Engel,
                _ => Geometry::Cartan,
            }),
            "grushin" => {
                if !known(&["k", "l", "gamma"]) {
                    return Err(bad());
                }
                let k: usize = get("k").unwrap_or("1").parse().map_err(|_| bad())?;
                let l: usize = get("l").unwrap_or("1").parse().map_err(|_| bad())?;
                let gamma: f64 = get("gamma").unwrap_or("1").parse().map_err(|_| bad())?;
                if k == 0 || l == 0 || !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(bad());
                }
                Ok(Geometry::Grushin { k, l, gamma })
            }
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Geometry {
    type Error = GeometryError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Geometry> for String {
    fn from(g: Geometry) -> String {
        g.to_string()
    }
}

/// Homogeneous dimension `Q`.
pub fn homogeneous_dim(g: &Geometry) -> f64 {
    match *g {
        Geometry::Euclidean { n } => n as f64,
        Geometry::Heisenberg1 => 4.0,
        Geometry::Grushin { k, l, gamma } => k as f64 + (1.0 + gamma) * l as f64,
        Geometry::Engel => 7.0,
        Geometry::Cartan => 10.0,
    }
}

/// Closed-form gauge; `d(0) = 0`.
pub fn quasi_norm(g: &Geometry, x: &[f64]) -> Result<f64, GeometryError> {
    g.check_dim(x)?;
    match *g {
        Geometry::Euclidean { .. } => Ok(x.iter().map(|v| v * v).sum::<f64>().sqrt()),
        Geometry::Heisenberg1 => {
            let rho2 = x[0] * x[0] + x[1] * x[1];
            Ok((rho2 * rho2 + 16.0 * x[2] * x[2]).powf(0.25))
        }
        Geometry::Grushin { k, gamma, .. } => {
            let m = 2.0 * (1.0 + gamma);
            let c = (1.0 + gamma) / gamma;
            Ok((xi_norm(x, k).powf(m) + c * c * zeta_sq(x, k)).powf(1.0 / m))
        }
        Geometry::Engel | Geometry::Cartan => Err(GeometryError::GaugeUnavailable(g.to_string())),
    }
}

/// `Ψ(x)`: `1` on Euclidean space, `|x'|² d⁻²` on the Heisenberg group and
/// `|ξ|^{2γ} d^{-2γ}` on Grushin space.
pub fn psi_closed(g: &Geometry, x: &[f64]) -> Result<f64, GeometryError> {
    let d = quasi_norm(g, x)?;
    if d == 0.0 {
        return Err(GeometryError::AtOrigin);
    }
    match *g {
        Geometry::Euclidean { .. } => Ok(1.0),
        Geometry::Heisenberg1 => Ok((x[0] * x[0] + x[1] * x[1]) / (d * d)),
        Geometry::Grushin { k, gamma, .. } => Ok((xi_norm(x, k) / d).powf(2.0 * gamma)),
        Geometry::Engel | Geometry::Cartan => unreachable!("gauge checked above"),
    }
}

/// `(X_i f)(x)` for every horizontal field, by central differences along the
/// coordinate axes contracted with the field coefficients.
pub fn horizontal_gradient_fd(
    g: &Geometry,
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>, GeometryError> {
    g.check_dim(x)?;
    let grad = fd::gradient(f, x, h);
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::NonFinite { point: x.to_vec() });
    }
    Ok(contract(g, x, &grad))
}

/// Applies the field coefficients at `x` to a coordinate gradient.
pub fn contract(g: &Geometry, x: &[f64], grad: &[f64]) -> Vec<f64> {
    g.vector_fields(x)
        .iter()
        .map(|c| c.iter().zip(grad).map(|(a, b)| a * b).sum())
        .collect()
}

/// `⟨A(x) ξ, ξ⟩`.
pub fn a_norm_sq(g: &Geometry, x: &[f64], xi: &[f64]) -> Result<f64, GeometryError> {
    g.check_dim(x)?;
    g.check_dim(xi)?;
    let a = g.a_matrix(x);
    let n = xi.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * xi[i] * xi[j];
        }
    }
    Ok(acc)
}

/// `⟨A(x) ξ, η⟩`.
pub fn a_inner(g: &Geometry, x: &[f64], xi: &[f64], eta: &[f64]) -> f64 {
    let a = g.a_matrix(x);
    let n = xi.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * xi[i] * eta[j];
        }
    }
    acc
}

/// Largest entrywise deviation `|A(x) - Σ X_i X_iᵀ|`.
pub fn gram_check(g: &Geometry, x: &[f64]) -> f64 {
    let a = g.a_matrix(x);
    let fields = g.vector_fields(x);
    let n = g.ambient_dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let gram: f64 = fields.iter().map(|c| c[i] * c[j]).sum();
            worst = worst.max((a[(i, j)] - gram).abs());
        }
    }
    worst
}

/// Largest `|A_ij - A_ji|`.
pub fn symmetry_defect(g: &Geometry, x: &[f64]) -> f64 {
    let a = g.a_matrix(x);
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Smallest eigenvalue of `A(x)`.
pub fn min_eigenvalue(g: &Geometry, x: &[f64]) -> f64 {
    g.a_matrix(x)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
