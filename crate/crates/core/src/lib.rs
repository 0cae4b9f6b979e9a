//! Numerical harness for free-product, free-group and q-Fock operator inequalities.

pub mod capacity;
pub mod error;
pub mod experiments;
pub mod freeprod;
pub mod group_lab;
pub mod ineq;
pub mod linalg;
pub mod normcalc;
pub mod qfock;
pub mod scalar;

pub use error::{Error, Result};
