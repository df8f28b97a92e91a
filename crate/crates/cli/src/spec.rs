//! Run-spec records. Every record rejects unknown keys; optional keys carry
//! defaults that are filled in before the spec is echoed.

use bessel_core::geometry::Geometry;
use bessel_core::hardy::SearchFamily;
use bessel_core::profile::TestProfile;
use serde::{Deserialize, Serialize};

fn tol_certify() -> f64 {
    1e-9
}

fn tol_ode() -> f64 {
    1e-10
}

fn tol_inequality() -> f64 {
    1e-10
}

fn tol_search() -> f64 {
    1e-8
}

fn tol_hypothesis() -> f64 {
    1e-5
}

fn one() -> f64 {
    1.0
}

fn unit_weight() -> String {
    "1".into()
}

fn yes() -> bool {
    true
}

fn hundred() -> usize {
    100
}

fn first_order() -> u8 {
    1
}

fn two() -> f64 {
    2.0
}

fn half() -> f64 {
    0.5
}

fn default_lambdas() -> Vec<f64> {
    vec![0.5, 2.0, 10.0]
}

fn default_tolerance_l() -> f64 {
    1e-7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    #[serde(rename = "W")]
    pub w: String,
    #[serde(rename = "H")]
    pub h: String,
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub r0: f64,
    #[serde(default = "tol_certify")]
    pub tol: f64,
    /// Declared tail exponent of `W`.
    #[serde(rename = "W_decay", default)]
    pub w_decay: Option<f64>,
    #[serde(rename = "H_decay", default)]
    pub h_decay: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    #[serde(rename = "W")]
    pub w: String,
    #[serde(rename = "H")]
    pub h: String,
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub r0: f64,
    pub r1: f64,
    #[serde(default = "one")]
    pub v0: f64,
    #[serde(default)]
    pub dv0: f64,
    #[serde(default = "tol_ode")]
    pub tol: f64,
    #[serde(default)]
    pub stop_at_zero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiconeFamily {
    /// Damped trigonometric `u`, exponential-trigonometric `v`; second-order
    /// runs pair it with a superharmonic `v`.
    RandomSmooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiconeSpec {
    pub geometry: Geometry,
    pub p: f64,
    pub seed: u64,
    #[serde(default = "first_order")]
    pub order: u8,
    #[serde(default = "random_smooth")]
    pub family: PiconeFamily,
    #[serde(default)]
    pub complex: bool,
    #[serde(default = "hundred")]
    pub samples: usize,
    /// Allowed negative excursion of `L`.
    #[serde(default = "default_tolerance_l")]
    pub tolerance: f64,
}

fn random_smooth() -> PiconeFamily {
    PiconeFamily::RandomSmooth
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardyRadialSpec {
    #[serde(rename = "Q")]
    pub q: f64,
    pub p: f64,
    #[serde(rename = "W", default = "unit_weight")]
    pub w: String,
    #[serde(rename = "H")]
    pub h: String,
    pub profile: TestProfile,
    #[serde(default = "tol_inequality")]
    pub tol: f64,
    #[serde(default)]
    pub r_in: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardyGroupSpec {
    pub geometry: Geometry,
    pub p: f64,
    #[serde(rename = "W", default = "unit_weight")]
    pub w: String,
    #[serde(rename = "H")]
    pub h: String,
    pub profile: TestProfile,
    pub box_half_width: f64,
    pub exclusion: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "yes")]
    pub sensitivity: bool,
    /// Radial comparison tolerance (consistency action).
    #[serde(default = "tol_inequality")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardySearchSpec {
    #[serde(rename = "Q")]
    pub q: f64,
    pub p: f64,
    #[serde(rename = "W", default = "unit_weight")]
    pub w: String,
    /// Weight shape `H₀`; the reported constant multiplies it.
    #[serde(rename = "H")]
    pub h: String,
    pub family: SearchFamily,
    #[serde(default)]
    pub bounds: Option<Vec<(f64, f64)>>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "tol_search")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardySweepSpec {
    #[serde(rename = "Q")]
    pub q: f64,
    pub p: f64,
    #[serde(rename = "W", default = "unit_weight")]
    pub w: String,
    #[serde(rename = "H")]
    pub h: String,
    /// One-parameter family: `near-extremal` (ε) or `gaussian` (σ/R).
    pub family: SearchFamily,
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "tol_inequality")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HardySpec {
    Radial(HardyRadialSpec),
    Group(HardyGroupSpec),
    Consistency(HardyGroupSpec),
    Search(HardySearchSpec),
    Sweep(HardySweepSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RellichConstantSpec {
    pub n: u32,
    pub p: f64,
    #[serde(default)]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RellichHypothesisSpec {
    #[serde(rename = "W", default = "unit_weight")]
    pub w: String,
    pub v: String,
    #[serde(rename = "H")]
    pub h: String,
    pub p: f64,
    pub n: u32,
    pub radii: RadiiSpec,
    #[serde(default = "tol_hypothesis")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RellichCheckSpec {
    #[serde(rename = "W", default = "unit_weight")]
    pub w: String,
    #[serde(rename = "H")]
    pub h: String,
    pub p: f64,
    pub n: u32,
    pub profile: TestProfile,
    #[serde(default = "tol_inequality")]
    pub tol: f64,
    #[serde(default)]
    pub r_in: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RellichSpec {
    Constant(RellichConstantSpec),
    Hypothesis(RellichHypothesisSpec),
    Check(RellichCheckSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryCheckSpec {
    pub geometry: Geometry,
    pub seed: u64,
    #[serde(default = "hundred")]
    pub points: usize,
    #[serde(default = "two")]
    pub half_width: f64,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Gauge-gradient checks skip points closer to the origin than this.
    #[serde(default = "half")]
    pub min_gauge: f64,
}
