//! Lorentz-space norms, rearrangements and a gallery of extremal functions,
//! together with a laboratory of numerical checks for the classical
//! inequalities relating them (Hölder, embeddings, Morrey-type bounds).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod foundations;
pub mod gallery;
pub mod lab;
pub mod norms;
pub mod quadrature;
pub mod rearrangement;

pub use error::{LabError, Result};
pub use foundations::{conjugate_exponent, unit_ball_volume, BallDomain, Domain, Exponent, ExponentPair, Interval1D};
pub use norms::{DivergenceReason, NormValue};
pub use quadrature::QuadratureSpec;
pub use rearrangement::{AnalyticProfile, Profile, SampledField, StepProfile};
