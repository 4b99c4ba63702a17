//! Disturbance timing, end-point candidates and active packet sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Mode, NodeId, RhythmicSpec, TaskId, TaskSpec};
use crate::static_scheduler::{hop_of_nth, StaticScheduleResult};

/// Timing of one disturbance of the rhythmic task.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceEvent {
    pub task: TaskId,
    /// Instance m whose release carries the detection.
    pub instance: usize,
    pub nominal_period: usize,
    pub nominal_deadline: usize,
    /// t' = r_{0,m}
    pub detect: usize,
    /// t_{n->r} = r_{0,m+1}
    pub enter: usize,
    /// t_{r->n} = t_{n->r} + sum of rhythmic periods
    pub exit: usize,
    pub spec: RhythmicSpec,
}

impl DisturbanceEvent {
    pub fn new(task: &TaskSpec, instance: usize) -> Result<Self> {
        let spec = task
            .rhythmic
            .clone()
            .ok_or_else(|| Error::Task { task: task.id, reason: "no rhythmic spec".into() })?;
        Self::with_spec(task, instance, spec)
    }

    pub fn with_spec(task: &TaskSpec, instance: usize, spec: RhythmicSpec) -> Result<Self> {
        spec.validate()?;
        let detect = task.release(instance);
        let enter = detect + task.period;
        Ok(Self {
            task: task.id,
            instance,
            nominal_period: task.period,
            nominal_deadline: task.deadline,
            detect,
            enter,
            exit: enter + spec.total(),
            spec,
        })
    }

    /// `(release, deadline)` of each rhythmic packet.
    pub fn rhythmic_windows(&self) -> Vec<(usize, usize)> {
        let mut r = self.enter;
        self.spec
            .periods
            .iter()
            .zip(&self.spec.deadlines)
            .map(|(&p, &d)| {
                let w = (r, r + d);
                r += p;
                w
            })
            .collect()
    }

    /// t_ep^u = t_{r->n} + (beta - 1) * P0
    pub fn upper_bound(&self, beta: usize) -> usize {
        self.exit + beta.saturating_sub(1) * self.nominal_period
    }

    /// Actual `(release, deadline)` of every packet released in `[enter, until]`: the
    /// rhythmic packets, then nominal-period packets starting at `exit`.
    pub fn actual_packets(&self, until: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self.rhythmic_windows().into_iter().filter(|w| w.0 <= until).collect();
        let mut r = self.exit;
        while r <= until {
            out.push((r, r + self.nominal_deadline));
            r += self.nominal_period;
        }
        out
    }

    pub fn actual_releases(&self, until: usize) -> Vec<usize> {
        self.actual_packets(until).into_iter().map(|w| w.0).collect()
    }

    /// Earliest completion of the last rhythmic packet.
    pub fn earliest_last_finish(&self, demand: u32) -> usize {
        self.rhythmic_windows().last().map(|w| w.0).unwrap_or(self.enter) + demand as usize
    }

    pub fn is_nominal_release(&self, t: usize) -> bool {
        t % self.nominal_period == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhythmicWindow {
    pub start: usize,
    pub end: Option<usize>,
    pub end_upper_bound: usize,
    pub candidates: Vec<usize>,
}

pub fn compute_vrhy(task: &TaskSpec) -> BTreeSet<NodeId> {
    task.path.iter().copied().collect()
}

/// Releases within `[f_last, upper]`, ascending and unique.
pub fn end_point_candidates_from(releases: &[usize], f_last: usize, upper: usize) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = releases.iter().copied().filter(|&r| r >= f_last && r <= upper).collect();
    if set.is_empty() {
        return Err(Error::NoCandidate { lower: f_last, upper });
    }
    Ok(set.into_iter().collect())
}

pub fn end_point_candidates(event: &DisturbanceEvent, f_last: usize, beta: usize) -> Result<RhythmicWindow> {
    let upper = event.upper_bound(beta);
    let candidates = end_point_candidates_from(&event.actual_releases(upper), f_last, upper)?;
    Ok(RhythmicWindow { start: event.enter, end: None, end_upper_bound: upper, candidates })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeriodicRef {
    pub task: TaskId,
    pub packet: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary {
    /// Whole packet inside the dynamic window.
    Whole,
    /// Next nominal release `resume` lies after the end point: the packet ends at the end
    /// point and shares its hops with nominal instance `resume - 1`.
    Case1 { resume: usize, first_static: Option<usize> },
    /// Nominal instance `resume` is released before the end point; the deadline is clipped
    /// to its first static slot `t1`.
    Case2 { resume: usize, t1: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhythmicPacket {
    pub release: usize,
    pub deadline: usize,
    pub demand: u32,
    /// Hop of each demanded slot (TBS); `None` entries under PBS.
    pub labels: Vec<Option<usize>>,
    pub boundary: Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivePacketSets {
    pub candidate: usize,
    pub start: usize,
    pub rhythmic: Vec<RhythmicPacket>,
    pub periodic: Vec<PeriodicRef>,
    /// First nominal instance of the rhythmic task served by the static schedule again.
    pub resume: usize,
    /// Rhythmic packet whose remaining hops continue on the static slots of `resume - 1`.
    pub merged: Option<usize>,
}

impl ActivePacketSets {
    pub fn window_of(&self, t: usize) -> Option<usize> {
        let i = self.rhythmic.partition_point(|p| p.release <= t);
        if i == 0 {
            return None;
        }
        let p = &self.rhythmic[i - 1];
        (t < p.deadline).then_some(i - 1)
    }
}

fn demand_labels(mode: Mode, retries: &[u32], lossy: bool, count: Option<u32>) -> Vec<Option<usize>> {
    let full: Vec<usize> = if lossy {
        (0..retries.iter().sum::<u32>()).map(|n| hop_of_nth(retries, n)).collect()
    } else {
        (0..retries.len()).collect()
    };
    let n = count.map(|c| c as usize).unwrap_or(full.len());
    let labels: Vec<usize> = if count.is_some() {
        // a truncated packet repeats the static layout of the nominal instance it replaces
        (0..n as u32).map(|k| hop_of_nth(retries, k)).collect()
    } else {
        full
    };
    match mode {
        Mode::Tbs => labels.into_iter().map(Some).collect(),
        Mode::Pbs => vec![None; labels.len()],
    }
}

/// Full per-packet demand of the rhythmic task: hop count, or the retry budget when lossy.
pub fn full_demand(retries: &[u32], lossy: bool) -> u32 {
    if lossy {
        retries.iter().sum()
    } else {
        retries.len() as u32
    }
}

/// Builds the rhythmic packets to place in `[enter, candidate)` and the periodic
/// packets whose static slots fall there.
pub fn build_active_sets(
    candidate: usize,
    event: &DisturbanceEvent,
    st: &StaticScheduleResult,
    tasks: &[TaskSpec],
    lossy: bool,
) -> Result<ActivePacketSets> {
    let infeasible = |reason: String| Error::InfeasibleCandidate { candidate, reason };
    if candidate <= event.enter {
        return Err(infeasible("end point precedes the rhythmic window".into()));
    }
    if candidate > st.horizon() {
        return Err(infeasible("end point beyond the materialized schedule".into()));
    }
    let task0 = &tasks[event.task];
    let retries = &st.retries[event.task];
    let mode = st.schedule.mode;
    let p0 = event.nominal_period;
    let full = full_demand(retries, lossy);

    let actual: Vec<(usize, usize)> = event
        .actual_packets(candidate)
        .into_iter()
        .filter(|w| w.0 < candidate)
        .collect();
    let Some(&(rq, dq)) = actual.last() else {
        return Err(infeasible("no rhythmic packet before the end point".into()));
    };

    let mut rhythmic = Vec::with_capacity(actual.len());
    for &(r, d) in &actual[..actual.len() - 1] {
        rhythmic.push(RhythmicPacket {
            release: r,
            deadline: d.min(candidate),
            demand: full,
            labels: demand_labels(mode, retries, lossy, None),
            boundary: Boundary::Whole,
        });
    }

    let nominal_before = (candidate / p0) * p0;
    let (last, resume, merged) = if nominal_before > rq {
        let resume = candidate / p0;
        let t1 = *st
            .packet_slots(event.task, resume)
            .first()
            .ok_or_else(|| infeasible(format!("instance {resume} has no static slot in the horizon")))?;
        let boundary = if nominal_before == candidate && t1 >= candidate && dq <= candidate {
            Boundary::Whole
        } else {
            Boundary::Case2 { resume, t1 }
        };
        let p = RhythmicPacket {
            release: rq,
            deadline: dq.min(candidate).min(t1),
            demand: full,
            labels: demand_labels(mode, retries, lossy, None),
            boundary,
        };
        (p, resume, None)
    } else {
        let resume = candidate / p0 + 1;
        let next_nominal = resume * p0;
        let k0 = (candidate..st.horizon()).find(|&t| matches!(st.schedule.at(t), Some(a) if a.task == event.task));
        let Some(tk0) = k0 else {
            return Err(infeasible("rhythmic task has no static slot after the end point".into()));
        };
        let a = st.schedule.at(tk0).expect("slot found above");
        let (demand, labels, first_static, merged) = if tk0 >= next_nominal {
            (full, demand_labels(mode, retries, lossy, None), None, None)
        } else {
            debug_assert_eq!(a.packet, resume - 1);
            let done = a.nth;
            (done, demand_labels(mode, retries, lossy, Some(done)), Some(tk0), Some(actual.len() - 1))
        };
        let p = RhythmicPacket {
            release: rq,
            deadline: candidate,
            demand,
            labels,
            boundary: Boundary::Case1 { resume, first_static },
        };
        (p, resume, merged)
    };
    rhythmic.push(last);

    for (i, p) in rhythmic.iter().enumerate() {
        if p.deadline < p.release || (p.deadline - p.release) < p.demand as usize {
            return Err(infeasible(format!(
                "rhythmic packet {i} needs {} slots in [{}, {})",
                p.demand, p.release, p.deadline
            )));
        }
    }

    let mut periodic: BTreeSet<(usize, TaskId)> = BTreeSet::new();
    for t in event.enter..candidate {
        if let Some(a) = st.schedule.at(t) {
            if a.task != event.task {
                periodic.insert((a.packet, a.task));
            }
        }
    }
    debug_assert!(task0.hops() >= 2);
    Ok(ActivePacketSets {
        candidate,
        start: event.enter,
        rhythmic,
        periodic: periodic.into_iter().map(|(packet, task)| PeriodicRef { task, packet }).collect(),
        resume,
        merged,
    })
}

/// Endpoints of the transmission occupying a slot, and whether it is rhythmic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotUse {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub rhythmic: bool,
}

impl SlotUse {
    pub fn involves(&self, node: NodeId) -> bool {
        self.sender == node || self.receiver == node
    }
}

/// Slot use implied by the static schedule alone. PBS slots are attributed to the
/// earliest hop that could still be pending, i.e. hop `nth` capped at the last hop.
pub fn static_slot_use(st: &StaticScheduleResult, tasks: &[TaskSpec], t: usize) -> Option<SlotUse> {
    let a = st.schedule.at(t)?;
    let task = &tasks[a.task];
    let hop = a.hop.unwrap_or((a.nth as usize).min(task.hops() - 1));
    Some(SlotUse { sender: task.sender(hop), receiver: task.receiver(hop), rhythmic: false })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremCheck {
    pub node: NodeId,
    pub t1: usize,
    pub t2: usize,
    pub witness: Option<usize>,
}

impl TheoremCheck {
    pub fn violated(&self) -> bool {
        self.witness.is_none()
    }
}

/// Slot at which `node` first holds the disturbance information: the detection slot for
/// the sensor, otherwise the first slot of the hop into `node` of the detecting packet.
pub fn info_arrival(event: &DisturbanceEvent, st: &StaticScheduleResult, tasks: &[TaskSpec], node: NodeId) -> Option<usize> {
    let task = &tasks[event.task];
    let pos = task.path.iter().position(|&n| n == node)?;
    if pos == 0 {
        return Some(event.detect);
    }
    let hop = pos - 1;
    let slots = st.packet_slots(event.task, event.instance);
    match st.schedule.mode {
        Mode::Tbs => slots.iter().copied().find(|&t| st.schedule.at(t).and_then(|a| a.hop) == Some(hop)),
        Mode::Pbs => slots.get(hop).copied(),
    }
}

/// Looks for an idle slot at `node` strictly between information arrival and the node's
/// first rhythmic involvement under `use_at`.
pub fn check_idle_slot_theorem(
    event: &DisturbanceEvent,
    st: &StaticScheduleResult,
    tasks: &[TaskSpec],
    node: NodeId,
    use_at: impl Fn(usize) -> Option<SlotUse>,
) -> Option<TheoremCheck> {
    let t1 = info_arrival(event, st, tasks, node)?;
    let limit = st.horizon();
    let t2 = (event.enter..limit).find(|&t| matches!(use_at(t), Some(u) if u.rhythmic && u.involves(node)))?;
    let witness = (t1 + 1..t2).find(|&t| !matches!(use_at(t), Some(u) if u.involves(node)));
    Some(TheoremCheck { node, t1, t2, witness })
}

/// Idle-slot check against the static schedule only: the first rhythmic involvement is
/// taken to be the node's first slot of instance m+1.
pub fn check_idle_slot_theorem_static(
    event: &DisturbanceEvent,
    st: &StaticScheduleResult,
    tasks: &[TaskSpec],
    node: NodeId,
) -> Option<TheoremCheck> {
    let next = event.instance + 1;
    check_idle_slot_theorem(event, st, tasks, node, |t| {
        let mut u = static_slot_use(st, tasks, t)?;
        let a = st.schedule.at(t)?;
        u.rhythmic = a.task == event.task && a.packet == next;
        Some(u)
    })
}
