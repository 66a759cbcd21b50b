//! Growth vectors, characteristic line fields and singular curves of
//! rank-2 distributions on 4-manifolds presented as Pfaffian pairs
//! `θ1 = dx + f dw`, `θ2 = dy + g dw`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line
//! front end and the acceptance harness live in the `sardkit` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod charfield;
pub mod distribution;
pub mod endpoint;
pub mod error;
pub mod field;
pub mod flow;
pub mod linalg;
pub mod ode;
pub mod poly;
pub mod sard;

pub use charfield::{char_field, coeffs_corrected, coeffs_oracle, coeffs_printed, cross_check, Variant};
pub use distribution::{
    engel_certificate, frame, growth_vector, sigma_check, CatalogModel, GrowthVector, PfaffianPair, QueryPoint,
};
pub use error::{Error, Result};
pub use field::{lie_bracket, PolyVectorField};
pub use poly::{Point4, Rational, RationalPoint, SparsePoly, Var};
