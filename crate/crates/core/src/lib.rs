//! Disturbance handling for slot-scheduled real-time wireless networks.
//!
//! Nodes on the route of a disturbed task learn about the disturbance from the task's
//! own packet, build a temporary schedule locally, and preempt conflicting periodic
//! transmissions through a priority-offset MAC. The crate covers the full pipeline:
//! static EDF schedules with retry vectors, end-point selection, packet and
//! transmission dropping, dynamic schedule overlay, MAC arbitration and a seeded
//! slot-level simulator.

pub mod config;
pub mod dropping;
pub mod error;
pub mod mac;
pub mod model;
pub mod rhythmic;
pub mod sim;
pub mod static_scheduler;

pub use error::{Error, Result};
