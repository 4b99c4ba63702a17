//! Shared domain types and reliability math.

mod generate;
mod network;
mod reliability;
mod schedule;
mod task;

pub use generate::{generate_taskset, generate_taskset_with, slot_utilization, PathCatalog, MAX_HOPS, MAX_PERIOD, MIN_HOPS};
pub use network::{Link, NetworkModel, NodeId};
pub use reliability::{meets, packet_pdr, pbs_pdr, pdr_degradation, PDR_EPS};
pub(crate) use reliability::{hop_success, pdr_product};
pub use schedule::{Assignment, Mode, Schedule};
pub use task::{generate_rhythmic_spec, PacketInstance, RhythmicSpec, TaskId, TaskSpec};

use crate::error::{Error, Result};

/// Required end-to-end delivery ratio shared by all tasks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityTarget(f64);

impl ReliabilityTarget {
    pub fn new(required: f64) -> Result<Self> {
        if required > 0.0 && required < 1.0 {
            Ok(Self(required))
        } else {
            Err(Error::Contract(format!("required pdr {required} outside (0,1)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}
