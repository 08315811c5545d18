//! Simulation, monitoring and sufficient-condition certification of until
//! formulas for hybrid inclusions `H = (C, F, D, G)`.

// `!(a < b)` is used on purpose so that NaN falls on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::too_many_arguments)]

pub mod arc;
pub mod aux;
pub mod cert;
pub mod certify;
pub mod config;
pub mod dsl;
pub mod error;
pub mod expr;
pub mod func;
pub mod grid;
pub mod monitor;
pub mod report;
pub mod run;
pub mod scenarios;
pub mod set;
pub mod sim;
pub mod system;
pub mod tangent;
pub mod time;

pub use error::{Error, Result};
