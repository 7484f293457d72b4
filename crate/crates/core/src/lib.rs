//! Certified numerics for Bernoulli convolutions and their tent maps.
//!
//! The pipeline runs bottom-up:
//!
//! * [`digits`] counts digit strings below a threshold with a sorted
//!   half-sum table,
//! * [`cdf`] turns counts into dyadic bounds on the distribution function,
//! * [`envelope`] inverts those bounds into brackets on the tent map,
//! * [`convexity`] decides discrete convexity from the brackets,
//! * [`density`] evaluates the density bounds that convexity would imply.

// Guards are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cdf;
pub mod cli;
pub mod convexity;
pub mod density;
pub mod digits;
pub mod envelope;
pub mod error;
pub mod exact;
pub mod lambda;
pub mod output;

pub use cdf::{f_lower, f_lower_interval, f_upper, f_upper_interval, lipschitz_d, Bounds, DyadicProb, LambdaInterval};
pub use convexity::{check_interval, check_point, scan, CheckParams, ConvexityCertificate, Status};
pub use density::{rychlik_bounds, sup_density_pipeline, RychlikBound};
pub use digits::{brute_force_count, HalfSumTable, TableOptions};
pub use envelope::{build_envelope, phi_lower, phi_upper, EnvelopeParams, TentEnvelope};
pub use error::{Error, Result};
pub use lambda::{Lambda, Preset};
