//! Optimal rate regions for the cascade, broadcast and multiple-access networks, and
//! the state redistribution rate formulas.

mod broadcast;
mod cascade;
mod cq;
mod mac;
mod report;

pub use broadcast::{broadcast_bounds, broadcast_feasibility, Feasibility};
pub use cascade::{cascade_bounds, cascade_bounds_from_purification, state_redistribution_bounds};
pub use cq::{ClassicalQuantumState, CqEntry, CqFile};
pub use mac::{mac_bounds, mac_decompose, IsometryDecomposition};
pub use report::{Network, RateBound, RateBoundReport};
