//! Packet and transmission dropping and the dynamic schedule.

mod dynamic;
mod greedy;
mod oracle;
mod set_cover;
mod transmission;

pub use dynamic::{generate_dynamic_schedule, place_rhythmic, DropLevel, DynSlot, DynamicOptions, DynamicSchedule, SlotOwner, Solver};
pub use greedy::greedy_drop_packets;
pub use oracle::{optimal_drop_oracle, ORACLE_MAX_PACKETS, ORACLE_MAX_SLOTS};
pub use set_cover::from_set_cover;
pub use transmission::drop_transmissions;

use crate::error::Result;
use crate::model::{packet_pdr, pbs_pdr, pdr_degradation, Mode, NetworkModel, TaskSpec};
use crate::rhythmic::{ActivePacketSets, PeriodicRef};
use crate::static_scheduler::StaticScheduleResult;

/// Per rhythmic window, how many static slots of one periodic packet it could take over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionVector {
    pub packet: PeriodicRef,
    pub epsilon: Vec<u32>,
}

impl TransmissionVector {
    pub fn total(&self) -> u32 {
        self.epsilon.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandVector {
    pub v: Vec<u32>,
    pub available: Vec<u32>,
    pub demand: Vec<u32>,
}

impl DemandVector {
    /// Instance with only extra demands, as used by abstract dropping problems.
    pub fn from_extra(v: Vec<u32>) -> Self {
        let n = v.len();
        Self { demand: v.clone(), v, available: vec![0; n] }
    }

    pub fn satisfied(&self) -> bool {
        self.v.iter().all(|&x| x == 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropKind {
    Packet,
    Transmission,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropDecision {
    pub kind: DropKind,
    pub dropped_packets: Vec<PeriodicRef>,
    /// `(packet, slot)` pairs; empty for packet-level decisions.
    pub dropped_slots: Vec<(PeriodicRef, usize)>,
    pub degradations: Vec<(PeriodicRef, f64)>,
    pub total_degradation: f64,
}

impl DropDecision {
    pub fn empty(kind: DropKind) -> Self {
        Self { kind, dropped_packets: vec![], dropped_slots: vec![], degradations: vec![], total_degradation: 0.0 }
    }

    /// Packet-level decision: each dropped packet loses its whole delivery ratio.
    pub fn packets(dropped: Vec<PeriodicRef>, required: f64) -> Self {
        let degradations: Vec<_> = dropped.iter().map(|&p| (p, pdr_degradation(required, 0.0))).collect();
        let total_degradation = degradations.iter().map(|d| d.1).sum();
        Self { kind: DropKind::Packet, dropped_packets: dropped, dropped_slots: vec![], degradations, total_degradation }
    }

    pub fn drop_count(&self) -> usize {
        match self.kind {
            DropKind::Packet => self.dropped_packets.len(),
            DropKind::Transmission => self.dropped_slots.len(),
        }
    }

    pub fn is_dropped_packet(&self, p: PeriodicRef) -> bool {
        self.dropped_packets.contains(&p)
    }
}

/// One static slot of a periodic packet inside the dynamic window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateSlot {
    pub slot: usize,
    pub hop: Option<usize>,
    /// Rhythmic window containing the slot.
    pub window: Option<usize>,
}

/// Reliability state of a periodic packet that may lose transmissions.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicState {
    pub packet: PeriodicRef,
    pub mode: Mode,
    pub pdrs: Vec<f64>,
    pub retries: Vec<u32>,
    pub slots: Vec<CandidateSlot>,
}

impl PeriodicState {
    pub fn total(&self) -> u32 {
        self.retries.iter().sum()
    }

    /// Delivery ratio after removing `removed` slots; per-hop counts under TBS, a plain
    /// count under PBS.
    pub fn pdr_without(&self, removed: &[CandidateSlot]) -> f64 {
        match self.mode {
            Mode::Tbs => {
                let mut r = self.retries.clone();
                for s in removed {
                    let h = s.hop.expect("TBS slot carries a hop");
                    r[h] = r[h].saturating_sub(1);
                }
                packet_pdr(&self.pdrs, &r).unwrap_or(0.0)
            }
            Mode::Pbs => {
                let left = (self.total() as usize).saturating_sub(removed.len());
                if left < self.pdrs.len() {
                    0.0
                } else {
                    pbs_pdr(&self.pdrs, left)
                }
            }
        }
    }

    pub fn degradation_without(&self, removed: &[CandidateSlot], required: f64) -> f64 {
        pdr_degradation(required, self.pdr_without(removed))
    }
}

pub fn build_transmission_vectors(sets: &ActivePacketSets, st: &StaticScheduleResult) -> Vec<TransmissionVector> {
    sets.periodic
        .iter()
        .map(|&p| {
            let mut epsilon = vec![0u32; sets.rhythmic.len()];
            for &t in st.packet_slots(p.task, p.packet) {
                if let Some(i) = sets.window_of(t) {
                    epsilon[i] += 1;
                }
            }
            TransmissionVector { packet: p, epsilon }
        })
        .collect()
}

/// Demand per rhythmic packet against idle and rhythmic-task slots in its window.
pub fn build_demand_vector(sets: &ActivePacketSets, st: &StaticScheduleResult, rhythmic_task: usize) -> DemandVector {
    let n = sets.rhythmic.len();
    let mut available = vec![0u32; n];
    for (i, p) in sets.rhythmic.iter().enumerate() {
        available[i] = (p.release..p.deadline)
            .filter(|&t| match st.schedule.at(t) {
                None => true,
                Some(a) => a.task == rhythmic_task,
            })
            .count() as u32;
    }
    let demand: Vec<u32> = sets.rhythmic.iter().map(|p| p.demand).collect();
    let v = demand.iter().zip(&available).map(|(&d, &a)| d.saturating_sub(a)).collect();
    DemandVector { v, available, demand }
}

pub fn periodic_states(
    sets: &ActivePacketSets,
    st: &StaticScheduleResult,
    tasks: &[TaskSpec],
    net: &NetworkModel,
) -> Result<Vec<PeriodicState>> {
    sets.periodic
        .iter()
        .map(|&p| {
            let task = &tasks[p.task];
            let slots = st
                .packet_slots(p.task, p.packet)
                .iter()
                .map(|&t| CandidateSlot { slot: t, hop: st.schedule.at(t).and_then(|a| a.hop), window: sets.window_of(t) })
                .collect();
            Ok(PeriodicState {
                packet: p,
                mode: st.schedule.mode,
                pdrs: net.path_pdrs(&task.path)?,
                retries: st.retries[p.task].clone(),
                slots,
            })
        })
        .collect()
}
