//! Hypersurfaces in Grushin space and their mean-value formulas.

pub mod ad;
pub mod analysis;
pub mod config;
pub mod cubature;
pub mod error;
pub mod field;
pub mod gauge;
pub mod identities;
pub mod quadrature;
pub mod report;
pub mod run;
pub mod solver;
pub mod surface;
pub mod tangential;

pub use error::{Error, Result};
