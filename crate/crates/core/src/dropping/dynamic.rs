use std::collections::BTreeSet;

use super::{
    build_demand_vector, build_transmission_vectors, drop_transmissions, greedy_drop_packets, optimal_drop_oracle,
    periodic_states, DemandVector, DropDecision, DropKind,
};
use crate::error::{Error, Result};
use crate::model::{Assignment, Mode, NetworkModel, NodeId, TaskSpec};
use crate::rhythmic::{
    build_active_sets, end_point_candidates, full_demand, info_arrival, static_slot_use, ActivePacketSets, DisturbanceEvent,
    SlotUse,
};
use crate::static_scheduler::StaticScheduleResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Greedy,
    Oracle,
}

pub type DropLevel = DropKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicOptions {
    /// Rhythmic packets need the full retry budget rather than one slot per hop.
    pub lossy: bool,
    pub beta: usize,
    pub required: f64,
    pub level: DropLevel,
    pub solver: Solver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynSlot {
    Keep,
    /// `nth` slot of rhythmic packet `packet`; `hop` is fixed under TBS.
    Rhythmic { packet: usize, hop: Option<usize>, nth: u32 },
}

/// Who transmits in a slot once the dynamic schedule is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotOwner {
    Idle,
    Periodic(Assignment),
    Rhythmic { packet: usize, hop: Option<usize>, nth: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicSchedule {
    pub event: DisturbanceEvent,
    /// Chosen end point t_ep*.
    pub end: usize,
    pub sets: ActivePacketSets,
    pub demand: DemandVector,
    pub decision: DropDecision,
    /// Overlay for `[event.enter, end)`.
    pub slots: Vec<DynSlot>,
    /// Every candidate tried, with the reason it was rejected.
    pub tried: Vec<(usize, Option<String>)>,
    freed: BTreeSet<usize>,
    rhythmic_task: usize,
    merged_slots: Vec<usize>,
}

impl DynamicSchedule {
    pub fn start(&self) -> usize {
        self.event.enter
    }

    pub fn at(&self, t: usize) -> DynSlot {
        if t >= self.start() && t < self.end {
            self.slots[t - self.start()]
        } else {
            DynSlot::Keep
        }
    }

    /// Slots given to rhythmic packet `i`, ascending; includes static slots inherited by a
    /// packet that straddles the end point.
    pub fn rhythmic_slots(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, DynSlot::Rhythmic { packet, .. } if *packet == i))
            .map(|(x, _)| x + self.start())
            .collect();
        if self.sets.merged == Some(i) {
            out.extend(&self.merged_slots);
        }
        out
    }

    /// Slots released by dropping decisions.
    pub fn freed_slots(&self) -> &BTreeSet<usize> {
        &self.freed
    }

    /// Whether the static rhythmic-task instance `k` is replaced by the dynamic schedule.
    pub fn suppresses(&self, k: usize) -> bool {
        k > self.event.instance && k < self.sets.resume
    }

    pub fn owner(&self, t: usize, st: &StaticScheduleResult) -> SlotOwner {
        if let DynSlot::Rhythmic { packet, hop, nth } = self.at(t) {
            return SlotOwner::Rhythmic { packet, hop, nth };
        }
        let Some(a) = st.schedule.at(t) else { return SlotOwner::Idle };
        if a.task == self.rhythmic_task {
            if let Some(q) = self.sets.merged {
                if a.packet + 1 == self.sets.resume && t >= self.end {
                    return SlotOwner::Rhythmic { packet: q, hop: a.hop, nth: a.nth };
                }
            }
            if self.suppresses(a.packet) {
                return SlotOwner::Idle;
            }
            return SlotOwner::Periodic(a);
        }
        let p = crate::rhythmic::PeriodicRef { task: a.task, packet: a.packet };
        if self.decision.is_dropped_packet(p) || self.freed.contains(&t) {
            return SlotOwner::Idle;
        }
        SlotOwner::Periodic(a)
    }

    /// Nominal endpoints of the transmission in slot `t`.
    pub fn slot_use(&self, t: usize, st: &StaticScheduleResult, tasks: &[TaskSpec]) -> Option<SlotUse> {
        match self.owner(t, st) {
            SlotOwner::Idle => None,
            SlotOwner::Periodic(_) => static_slot_use(st, tasks, t),
            SlotOwner::Rhythmic { hop, nth, .. } => {
                let task = &tasks[self.rhythmic_task];
                let h = hop.unwrap_or((nth as usize).min(task.hops() - 1));
                Some(SlotUse { sender: task.sender(h), receiver: task.receiver(h), rhythmic: true })
            }
        }
    }
}

/// Places rhythmic packets earliest-first in idle, rhythmic-task and freed slots of their
/// windows. A node's first rhythmic transmission waits until it has had a free slot after
/// learning of the disturbance.
pub fn place_rhythmic(
    sets: &ActivePacketSets,
    event: &DisturbanceEvent,
    st: &StaticScheduleResult,
    tasks: &[TaskSpec],
    freed: &BTreeSet<usize>,
) -> Result<Vec<DynSlot>> {
    let start = sets.start;
    let task0 = &tasks[event.task];
    let mut slots = vec![DynSlot::Keep; sets.candidate - start];
    let mut ready: Vec<(NodeId, Option<usize>, bool)> = task0
        .path
        .iter()
        .map(|&n| (n, info_arrival(event, st, tasks, n), false))
        .collect();

    let usable = |t: usize| match st.schedule.at(t) {
        None => true,
        Some(a) => a.task == event.task || freed.contains(&t),
    };
    let involved = |slots: &[DynSlot], t: usize, node: NodeId| -> bool {
        if t >= start {
            match slots[t - start] {
                DynSlot::Rhythmic { hop, nth, .. } => {
                    let h = hop.unwrap_or((nth as usize).min(task0.hops() - 1));
                    return task0.involves(h, node);
                }
                DynSlot::Keep => {
                    if usable(t) {
                        return false;
                    }
                }
            }
        }
        matches!(static_slot_use(st, tasks, t), Some(u) if u.involves(node))
    };

    for (i, p) in sets.rhythmic.iter().enumerate() {
        let mut nth = 0u32;
        let mut t = p.release;
        while nth < p.demand {
            if t >= p.deadline {
                return Err(Error::InfeasibleCandidate {
                    candidate: sets.candidate,
                    reason: format!("rhythmic packet {i} placed {nth} of {} slots", p.demand),
                });
            }
            if usable(t) {
                let hop = p.labels[nth as usize];
                let h = hop.unwrap_or((nth as usize).min(task0.hops() - 1));
                let ends = [task0.sender(h), task0.receiver(h)];
                let ok = ends.iter().all(|&n| {
                    let Some(r) = ready.iter().find(|x| x.0 == n) else { return true };
                    match (r.1, r.2) {
                        (_, true) | (None, _) => true,
                        (Some(t1), false) => (t1 + 1..t).any(|x| !involved(&slots, x, n)),
                    }
                });
                if ok {
                    slots[t - start] = DynSlot::Rhythmic { packet: i, hop, nth };
                    for r in ready.iter_mut().filter(|r| ends.contains(&r.0)) {
                        r.2 = true;
                    }
                    nth += 1;
                }
            }
            t += 1;
        }
    }
    Ok(slots)
}

fn freed_slots(decision: &DropDecision, sets: &ActivePacketSets, st: &StaticScheduleResult) -> BTreeSet<usize> {
    match decision.kind {
        DropKind::Packet => decision
            .dropped_packets
            .iter()
            .flat_map(|p| st.packet_slots(p.task, p.packet).iter().copied())
            .filter(|&t| t >= sets.start && t < sets.candidate)
            .collect(),
        DropKind::Transmission => decision.dropped_slots.iter().map(|x| x.1).collect(),
    }
}

fn evaluate(
    candidate: usize,
    event: &DisturbanceEvent,
    st: &StaticScheduleResult,
    tasks: &[TaskSpec],
    net: &NetworkModel,
    opts: &DynamicOptions,
) -> Result<DynamicSchedule> {
    let sets = build_active_sets(candidate, event, st, tasks, opts.lossy)?;
    let demand = build_demand_vector(&sets, st, event.task);
    let vectors = build_transmission_vectors(&sets, st);
    let states = periodic_states(&sets, st, tasks, net)?;
    let decision = match (opts.level, opts.solver) {
        (DropKind::Packet, Solver::Greedy) => greedy_drop_packets(&demand, &vectors, opts.required)?,
        (DropKind::Transmission, Solver::Greedy) => drop_transmissions(&demand, &states, opts.required)?,
        (kind, Solver::Oracle) => optimal_drop_oracle(&demand, &vectors, kind, &states, opts.required)?,
    };
    let freed = freed_slots(&decision, &sets, st);
    let slots = place_rhythmic(&sets, event, st, tasks, &freed)?;
    let merged_slots = match sets.merged {
        Some(_) => st.packet_slots(event.task, sets.resume - 1).iter().copied().filter(|&t| t >= candidate).collect(),
        None => vec![],
    };
    Ok(DynamicSchedule {
        event: event.clone(),
        end: candidate,
        sets,
        demand,
        decision,
        slots,
        tried: vec![],
        freed,
        rhythmic_task: event.task,
        merged_slots,
    })
}

/// Evaluates every end-point candidate and keeps the cheapest: fewest dropped packets
/// for packet-level dropping, least total degradation otherwise. Ties go to the earliest.
pub fn generate_dynamic_schedule(
    event: &DisturbanceEvent,
    st: &StaticScheduleResult,
    tasks: &[TaskSpec],
    net: &NetworkModel,
    opts: &DynamicOptions,
) -> Result<DynamicSchedule> {
    let retries = &st.retries[event.task];
    let demand = full_demand(retries, opts.lossy);
    let window = end_point_candidates(event, event.earliest_last_finish(demand), opts.beta)?;
    let mut tried = Vec::new();
    let mut best: Option<DynamicSchedule> = None;
    for &c in &window.candidates {
        match evaluate(c, event, st, tasks, net, opts) {
            Ok(d) => {
                tried.push((c, None));
                let better = match &best {
                    None => true,
                    Some(b) => match opts.level {
                        DropKind::Packet => d.decision.dropped_packets.len() < b.decision.dropped_packets.len(),
                        DropKind::Transmission => d.decision.total_degradation < b.decision.total_degradation - 1e-12,
                    },
                };
                if better {
                    best = Some(d);
                }
            }
            Err(e) => tried.push((c, Some(e.to_string()))),
        }
    }
    let mut best = best.ok_or(Error::DisturbanceInfeasible { tried: tried.len() })?;
    best.tried = tried;
    debug_assert!(st.schedule.mode == Mode::Pbs || best.slots.iter().all(|s| !matches!(s, DynSlot::Rhythmic { hop: None, .. })));
    Ok(best)
}
