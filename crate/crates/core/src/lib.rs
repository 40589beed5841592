//! Rate regions and finite-blocklength simulation for coordinating quantum states
//! over cascade, broadcast and multiple-access networks.

pub mod entropy;
pub mod error;
pub mod games;
pub mod protocols;
pub mod qla;
pub mod regions;
pub mod tolerance;
pub mod typicality;

pub use error::{Error, Result};
pub use tolerance::{Tolerances, TOL};
