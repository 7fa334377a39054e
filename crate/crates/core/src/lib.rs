//! Construction and verification of Sasakian 3-manifold structures from
//! their local normal form.

// `!(x > t)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// tensor index loops read better than iterator chains
#![allow(clippy::needless_range_loop)]

pub mod conformal;
pub mod curvature;
pub mod elliptic;
pub mod error;
pub mod eta;
pub mod field;
pub mod jet;
pub mod metric;
pub mod npp;
pub mod quadrature;
pub mod sasaki;

pub use error::{Error, Result};
pub use jet::{CJet, Jet, Point};
