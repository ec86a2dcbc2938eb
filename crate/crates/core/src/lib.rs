//! Reconstruction of circular planar resistor networks from partial
//! boundary resistance-distance measurements and the Kirchhoff index.
//!
//! The pipeline runs in four stages:
//!
//! 1. switch optimization on a maximal planar resistor-switch network
//!    ([`mprsn`], [`estimator`], [`stage1`]),
//! 2. interior-node placement ([`interiors`]),
//! 3. planar candidate enumeration ([`planarity`]),
//! 4. edge-weight assignment and candidate selection ([`rewire`]).
//!
//! [`pipeline::reconstruct`] chains them. The electrical primitives in
//! [`netcore`] and the gadget arithmetic in [`mprsn`] are generic over the
//! scalar type; the optimizers work in `f64`.

pub mod constraints;
pub mod dccp;
pub mod error;
pub mod estimator;
pub mod fit;
pub mod interiors;
pub mod io;
pub mod measurements;
pub mod model;
pub mod mprsn;
pub mod netcore;
pub mod pipeline;
pub mod planarity;
pub mod rewire;
pub mod stage1;

pub use error::{Error, Result};
pub use measurements::MeasurementSet;
pub use netcore::{Edge, Network, Pair};

pub type NetworkF64 = Network<f64>;
pub type NetworkF32 = Network<f32>;
/// Exact rational used for gadget resistance enumeration.
pub type Rational = num_rational::Ratio<i64>;
