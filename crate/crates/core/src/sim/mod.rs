//! Slot-level simulation of static and dynamic schedules over lossy links.

mod baseline;
mod engine;
pub mod experiment;
mod metrics;
mod trace;

pub use baseline::{baseline_drt, broadcast_depth};
pub use engine::{assess, run, RunOutput};
pub use metrics::{degradation_rate, success_ratio, Metrics, TaskStats, CSV_HEADER};
pub use trace::{SimTrace, TraceKind, TraceRecord};

use serde::{Deserialize, Serialize};

use crate::dropping::{DropLevel, Solver};
use crate::error::{Error, Result};
use crate::mac::{PerModel, SlotTiming};
use crate::model::{Mode, NetworkModel, RhythmicSpec, TaskId, TaskSpec};
use crate::static_scheduler::hyperperiod;

/// Hyperperiods above this are not materialized; the horizon falls back to a few periods.
pub const HYPERPERIOD_CAP: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Framework {
    /// Local schedule generation, whole periodic packets dropped.
    DistributedPacket,
    /// Local schedule generation, single periodic transmissions dropped.
    DistributedTransmission,
    /// Controller learns of the disturbance and broadcasts the new schedule.
    BroadcastBaseline,
}

impl Framework {
    pub fn as_str(self) -> &'static str {
        match self {
            Framework::DistributedPacket => "distributed-packet",
            Framework::DistributedTransmission => "distributed-transmission",
            Framework::BroadcastBaseline => "broadcast-baseline",
        }
    }

    pub fn drop_level(self) -> Option<DropLevel> {
        match self {
            Framework::DistributedPacket => Some(DropLevel::Packet),
            Framework::DistributedTransmission => Some(DropLevel::Transmission),
            Framework::BroadcastBaseline => None,
        }
    }
}

impl std::fmt::Display for Framework {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSpec {
    pub task: TaskId,
    /// Instance whose release sees the disturbance.
    pub instance: usize,
    pub spec: RhythmicSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BroadcastModel {
    /// Broadcast task period; twice the rhythmic nominal period when unset.
    pub period: Option<usize>,
    pub offset: usize,
    /// Slots for the broadcast to cover the network; the controller's eccentricity when unset.
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub network: NetworkModel,
    pub tasks: Vec<TaskSpec>,
    pub mode: Mode,
    pub required: f64,
    pub horizon: Option<usize>,
    pub seed: u64,
    pub disturbance: Option<DisturbanceSpec>,
    /// Largest acceptable response time, in slots.
    pub alpha: usize,
    pub beta: usize,
    pub solver: Solver,
    pub framework: Framework,
    pub timing: SlotTiming,
    pub per: PerModel,
    pub broadcast: BroadcastModel,
    /// Rhythmic packets need their full retry budget; derived from the retry vector when unset.
    pub lossy: Option<bool>,
    pub rhythmic_priority: u32,
    pub periodic_priority: u32,
}

impl SimConfig {
    pub fn new(network: NetworkModel, tasks: Vec<TaskSpec>) -> Self {
        Self {
            network,
            tasks,
            mode: Mode::Tbs,
            required: 0.99,
            horizon: None,
            seed: 0,
            disturbance: None,
            alpha: usize::MAX,
            beta: 4,
            solver: Solver::Greedy,
            framework: Framework::DistributedTransmission,
            timing: SlotTiming::default(),
            per: PerModel::default(),
            broadcast: BroadcastModel::default(),
            lossy: None,
            rhythmic_priority: 0,
            periodic_priority: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta < 1 {
            return Err(Error::Config("beta must be at least 1".into()));
        }
        if !(self.required > 0.0 && self.required < 1.0) {
            return Err(Error::Config(format!("required pdr {} outside (0,1)", self.required)));
        }
        for t in &self.tasks {
            t.validate(&self.network)?;
        }
        self.timing.validate()?;
        if let Some(d) = &self.disturbance {
            let t = self.tasks.get(d.task).ok_or_else(|| Error::Config(format!("disturbed task {} unknown", d.task)))?;
            if self.alpha < t.period {
                return Err(Error::Config(format!("alpha {} below the nominal period {}", self.alpha, t.period)));
            }
            d.spec.validate()?;
        }
        if self.rhythmic_priority >= self.periodic_priority {
            return Err(Error::Config("rhythmic transmissions need a higher level than periodic ones".into()));
        }
        Ok(())
    }

    /// Run length: past the latest possible end point by two hyperperiods, or by two of the
    /// longest periods when the hyperperiod is too long.
    pub fn effective_horizon(&self) -> usize {
        if let Some(h) = self.horizon {
            return h;
        }
        let hp = hyperperiod(&self.tasks);
        let max_p = self.tasks.iter().map(|t| t.period).max().unwrap_or(1);
        let tail = if hp <= HYPERPERIOD_CAP { 2 * hp as usize } else { 2 * max_p };
        let upper = self
            .disturbance
            .as_ref()
            .map(|d| {
                let p0 = self.tasks[d.task].period;
                (d.instance + 1) * p0 + d.spec.total() + self.beta.saturating_sub(1) * p0
            })
            .unwrap_or(0);
        upper + tail.max(max_p)
    }
}
