//! Euler characteristics of even-dimensional manifolds from vector fields.

pub mod boundary;
pub mod clifford;
pub mod connection;
pub mod domain;
pub mod error;
pub mod field;
pub mod gbc;
pub mod numeric;
pub mod quadrature;
pub mod topology;
pub mod winding;
pub mod zeros;

pub use error::{Error, Result};
