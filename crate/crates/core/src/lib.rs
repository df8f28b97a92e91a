//! Numerical toolkit for Bessel pairs `(W, H)` and the weighted Hardy and
//! Rellich inequalities they generate.
//!
//! * [`weight`]: radial weight expressions with tail metadata.
//! * [`quadrature`]: adaptive Gauss-Kronrod, semi-infinite tails, Monte Carlo.
//! * [`geometry`]: Euclidean space, Heisenberg, Baouendi-Grushin, Engel and
//!   Cartan geometries with their gauges and horizontal fields.
//! * [`certify`]: integral criteria that certify a Bessel pair.
//! * [`ode`]: the radial quasilinear equation in flux form.
//! * [`picone`]: first- and second-order Picone identities, pointwise.
//! * [`hardy`]: radial and Monte Carlo Hardy checks, sharp-constant search.
//! * [`rellich`]: Rellich constants, supersolution checks and inequality checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod fd;
pub mod geometry;
pub mod hardy;
pub mod interp;
pub mod ode;
pub mod optimize;
pub mod picone;
pub mod profile;
pub mod quadrature;
pub mod rellich;
pub mod weight;

pub use certify::{
    certify_bessel_pair, certify_general, phi, Certificate, CertifyProblem, Verdict,
};
pub use geometry::{Geometry, GeometryError};
pub use hardy::InequalityReport;
pub use ode::{positivity_scan, solve_radial, verify_ode_residual, RadialSolution};
pub use profile::TestProfile;
pub use quadrature::{integrate_adaptive, integrate_tail, mc_integrate, McResult, QuadResult};
pub use weight::{parse_weight, Decay, WeightExpr, WeightFn};
