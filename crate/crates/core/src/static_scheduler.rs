//! Static EDF schedule synthesis and the schedulability checker.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::model::{hop_success, meets, pdr_product, Assignment, Mode, NetworkModel, Schedule, TaskId, TaskSpec};

/// Largest hyperperiod materialized by [`build_static_schedule`].
pub const MAX_MATERIALIZED: usize = 1 << 20;

const MAX_TRIALS_PER_HOP: usize = 64;

/// Fewest total trials reaching `required`; extra trials go to the hop with the largest
/// multiplicative gain, ties to the earliest hop.
pub fn allocate_retry_vector(pdrs: &[f64], required: f64) -> Result<Vec<u32>> {
    if pdrs.is_empty() {
        return Err(Error::Contract("empty path".into()));
    }
    if let Some(p) = pdrs.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::Contract(format!("hop pdr {p} outside (0,1]")));
    }
    if required >= 1.0 && pdrs.iter().any(|&p| p < 1.0) {
        return Err(Error::Unreachable(required));
    }
    let mut r = vec![1u32; pdrs.len()];
    let cap = pdrs.len() * MAX_TRIALS_PER_HOP;
    loop {
        if meets(pdr_product(pdrs, &r), required) {
            return Ok(r);
        }
        if r.iter().sum::<u32>() as usize >= cap {
            return Err(Error::Unreachable(required));
        }
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for (h, (&p, &n)) in pdrs.iter().zip(&r).enumerate() {
            let gain = hop_success(p, n + 1).ln() - hop_success(p, n).ln();
            if gain > best_gain {
                best_gain = gain;
                best = h;
            }
        }
        r[best] += 1;
    }
}

/// Retry vector of every task: explicit when given, allocated otherwise.
pub fn resolve_retries(tasks: &[TaskSpec], net: &NetworkModel, required: f64) -> Result<Vec<Vec<u32>>> {
    tasks
        .iter()
        .map(|t| match &t.retries {
            Some(r) => Ok(r.clone()),
            None => allocate_retry_vector(&net.path_pdrs(&t.path)?, required),
        })
        .collect()
}

pub fn hyperperiod(tasks: &[TaskSpec]) -> u64 {
    let mut l: u128 = 1;
    for t in tasks {
        l = l.lcm(&(t.period as u128));
        if l > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    l as u64
}

#[derive(Debug, Clone)]
pub struct StaticScheduleResult {
    pub schedule: Schedule,
    pub retries: Vec<Vec<u32>>,
    pub budgets: Vec<u32>,
    pub feasible: bool,
    pub hyperperiod: u64,
    /// First packet that missed its budget, as (task, instance).
    pub failure: Option<(TaskId, usize)>,
    slots: HashMap<(TaskId, usize), Vec<usize>>,
}

impl StaticScheduleResult {
    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }

    /// Slots granted to packet `(task, k)`, ascending.
    pub fn packet_slots(&self, task: TaskId, k: usize) -> &[usize] {
        self.slots.get(&(task, k)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Hop label of the `nth` slot of a `task` packet under TBS.
    pub fn hop_of_nth(&self, task: TaskId, nth: u32) -> usize {
        hop_of_nth(&self.retries[task], nth)
    }
}

pub(crate) fn hop_of_nth(retries: &[u32], nth: u32) -> usize {
    let mut acc = 0;
    for (h, &r) in retries.iter().enumerate() {
        acc += r;
        if nth < acc {
            return h;
        }
    }
    retries.len().saturating_sub(1)
}

/// EDF schedule over one hyperperiod.
pub fn build_static_schedule(tasks: &[TaskSpec], net: &NetworkModel, mode: Mode, required: f64) -> Result<StaticScheduleResult> {
    let hp = hyperperiod(tasks);
    if hp as u128 > MAX_MATERIALIZED as u128 {
        return Err(Error::Contract(format!("hyperperiod {hp} too large to materialize; give a horizon")));
    }
    build_static_schedule_until(tasks, net, mode, required, hp.max(1) as usize)
}

/// EDF schedule over `[0, horizon)`. Packets are prioritized by (deadline, task id); one
/// transmission per slot network-wide. Feasibility covers packets whose deadline is within
/// the horizon.
pub fn build_static_schedule_until(
    tasks: &[TaskSpec],
    net: &NetworkModel,
    mode: Mode,
    required: f64,
    horizon: usize,
) -> Result<StaticScheduleResult> {
    for (i, t) in tasks.iter().enumerate() {
        if t.id != i {
            return Err(Error::Task { task: t.id, reason: format!("task ids must be dense, found at position {i}") });
        }
        t.validate(net)?;
    }
    let retries = resolve_retries(tasks, net, required)?;
    let budgets: Vec<u32> = retries.iter().map(|r| r.iter().sum()).collect();
    let mut schedule = Schedule::idle(mode, horizon);
    let mut slots: HashMap<(TaskId, usize), Vec<usize>> = HashMap::new();
    let mut heap: BinaryHeap<Reverse<(usize, TaskId, usize)>> = BinaryHeap::new();
    let mut remaining: HashMap<(TaskId, usize), u32> = HashMap::new();
    let mut failure = None;

    for t in 0..horizon {
        for task in tasks {
            if t % task.period == 0 {
                let k = t / task.period;
                heap.push(Reverse((t + task.deadline, task.id, k)));
                remaining.insert((task.id, k), budgets[task.id]);
            }
        }
        while let Some(&Reverse((deadline, task, k))) = heap.peek() {
            if deadline > t {
                break;
            }
            failure.get_or_insert((task, k));
            heap.pop();
        }
        let Some(Reverse((deadline, task, k))) = heap.pop() else { continue };
        let left = remaining.get_mut(&(task, k)).expect("released packet");
        let nth = budgets[task] - *left;
        *left -= 1;
        let hop = match mode {
            Mode::Tbs => Some(hop_of_nth(&retries[task], nth)),
            Mode::Pbs => None,
        };
        schedule.slots[t] = Some(Assignment { task, packet: k, hop, nth });
        slots.entry((task, k)).or_default().push(t);
        if *left > 0 {
            heap.push(Reverse((deadline, task, k)));
        }
    }
    while let Some(Reverse((deadline, task, k))) = heap.pop() {
        if deadline <= horizon {
            failure.get_or_insert((task, k));
        }
    }
    Ok(StaticScheduleResult {
        schedule,
        retries,
        budgets,
        feasible: failure.is_none(),
        hyperperiod: hyperperiod(tasks),
        failure,
        slots,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SlotCount { task: TaskId, packet: usize, hop: Option<usize>, expected: u32, got: u32 },
    OutsideWindow { task: TaskId, packet: usize, slot: usize },
    HopOrder { task: TaskId, packet: usize, slot: usize },
    Reliability { task: TaskId, pdr: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Re-derives every per-packet property from the raw slot table.
pub fn verify_schedulable(result: &StaticScheduleResult, tasks: &[TaskSpec], net: &NetworkModel, required: f64) -> Verdict {
    let mut v = Verdict::default();
    let horizon = result.schedule.horizon();
    for task in tasks {
        let retries = &result.retries[task.id];
        match net.path_pdrs(&task.path) {
            Ok(pdrs) => {
                let pdr = match result.schedule.mode {
                    Mode::Tbs => pdr_product(&pdrs, retries),
                    Mode::Pbs => crate::model::pbs_pdr(&pdrs, result.budgets[task.id] as usize),
                };
                if !meets(pdr, required) {
                    v.violations.push(Violation::Reliability { task: task.id, pdr });
                }
            }
            Err(_) => v.violations.push(Violation::Reliability { task: task.id, pdr: 0.0 }),
        }
    }
    let mut per_packet: HashMap<(TaskId, usize), Vec<(usize, Assignment)>> = HashMap::new();
    for (t, a) in result.schedule.slots.iter().enumerate() {
        if let Some(a) = a {
            per_packet.entry((a.task, a.packet)).or_default().push((t, *a));
        }
    }
    for task in tasks {
        let retries = &result.retries[task.id];
        let mut k = 0;
        while task.release(k) < horizon {
            let (r, d) = (task.release(k), task.release(k) + task.deadline);
            let whole = d <= horizon;
            let list = per_packet.get(&(task.id, k)).map(|v| v.as_slice()).unwrap_or(&[]);
            for &(t, _) in list {
                if t < r || t >= d {
                    v.violations.push(Violation::OutsideWindow { task: task.id, packet: k, slot: t });
                }
            }
            match result.schedule.mode {
                Mode::Tbs => {
                    let mut last_hop = 0;
                    for &(t, a) in list {
                        let h = a.hop.unwrap_or(usize::MAX);
                        if h < last_hop || h >= task.hops() {
                            v.violations.push(Violation::HopOrder { task: task.id, packet: k, slot: t });
                            break;
                        }
                        last_hop = h;
                    }
                    if whole {
                        for (h, &want) in retries.iter().enumerate() {
                            let got = list.iter().filter(|(_, a)| a.hop == Some(h)).count() as u32;
                            if got != want {
                                v.violations.push(Violation::SlotCount {
                                    task: task.id,
                                    packet: k,
                                    hop: Some(h),
                                    expected: want,
                                    got,
                                });
                            }
                        }
                    }
                }
                Mode::Pbs => {
                    let want = result.budgets[task.id];
                    if whole && list.len() as u32 != want {
                        v.violations.push(Violation::SlotCount {
                            task: task.id,
                            packet: k,
                            hop: None,
                            expected: want,
                            got: list.len() as u32,
                        });
                    }
                }
            }
            k += 1;
        }
    }
    v
}
