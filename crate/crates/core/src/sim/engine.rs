use std::collections::{BTreeSet, HashMap};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::baseline::baseline_drt;
use super::metrics::{degradation_rate, Metrics, TaskStats};
use super::trace::{SimTrace, TraceKind};
use super::{Framework, SimConfig};
use crate::dropping::{generate_dynamic_schedule, DynSlot, DynamicOptions, DynamicSchedule, SlotOwner};
use crate::error::{Error, Result};
use crate::mac::{arbitrate_slot, ContendingTx, Outcome};
use crate::model::{slot_utilization, Assignment, NodeId, TaskId};
use crate::rhythmic::{full_demand, DisturbanceEvent};
use crate::static_scheduler::{build_static_schedule_until, StaticScheduleResult};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: SimTrace,
    pub metrics: Metrics,
    pub static_result: StaticScheduleResult,
    pub event: Option<DisturbanceEvent>,
    pub dynamic: Option<DynamicSchedule>,
    /// Why no dynamic schedule exists for a disturbed distributed run.
    pub dynamic_error: Option<Error>,
    pub horizon: usize,
}

/// Counter-based uniform draws: one value per (stream, slot), independent of call order.
struct Draws {
    base: ChaCha20Rng,
}

impl Draws {
    fn new(seed: u64) -> Self {
        Self { base: ChaCha20Rng::seed_from_u64(seed) }
    }

    fn unit(&self, stream: u64, slot: usize) -> f64 {
        let mut r = self.base.clone();
        r.set_stream(stream);
        r.set_word_pos(slot as u128 * 2);
        (r.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Periodic(TaskId, usize),
    Rhythmic(usize),
}

#[derive(Debug, Clone)]
struct Live {
    task: TaskId,
    deadline: usize,
    progress: usize,
    hops: usize,
}

struct Contender {
    key: Key,
    sender: NodeId,
    receiver: NodeId,
    priority: u32,
    listening: bool,
}

fn label(key: Key) -> String {
    match key {
        Key::Periodic(_, k) => k.to_string(),
        Key::Rhythmic(i) => format!("r{i}"),
    }
}

fn slot_label(a: Option<Assignment>) -> String {
    match a {
        None => "idle".into(),
        Some(a) => match a.hop {
            Some(h) => format!("{}.{}.{}", a.task, a.packet, h),
            None => format!("{}.{}.*", a.task, a.packet),
        },
    }
}

struct Prepared {
    st: StaticScheduleResult,
    event: Option<DisturbanceEvent>,
    dynamic: Option<DynamicSchedule>,
    dynamic_error: Option<Error>,
    horizon: usize,
}

fn prepare(cfg: &SimConfig) -> Result<Prepared> {
    cfg.validate()?;
    let horizon = cfg.effective_horizon();
    let st = build_static_schedule_until(&cfg.tasks, &cfg.network, cfg.mode, cfg.required, horizon)?;
    if !st.feasible {
        let (task, packet) = st.failure.unwrap_or((0, 0));
        return Err(Error::StaticInfeasible { task, packet });
    }
    let event = match &cfg.disturbance {
        Some(d) => Some(DisturbanceEvent::with_spec(&cfg.tasks[d.task], d.instance, d.spec.clone())?),
        None => None,
    };
    let mut dynamic = None;
    let mut dynamic_error = None;
    if let (Some(e), Some(level)) = (&event, cfg.framework.drop_level()) {
        let retries = &st.retries[e.task];
        let opts = DynamicOptions {
            lossy: cfg.lossy.unwrap_or(full_demand(retries, true) as usize > retries.len()),
            beta: cfg.beta,
            required: cfg.required,
            level,
            solver: cfg.solver,
        };
        match generate_dynamic_schedule(e, &st, &cfg.tasks, &cfg.network, &opts) {
            Ok(d) => dynamic = Some(d),
            Err(err) => dynamic_error = Some(err),
        }
    }
    Ok(Prepared { st, event, dynamic, dynamic_error, horizon })
}

fn summarize(cfg: &SimConfig, p: &Prepared, per_task: Vec<TaskStats>) -> Result<Metrics> {
    let mut metrics = Metrics {
        framework: cfg.framework,
        seed: cfg.seed,
        utilization: slot_utilization(&cfg.tasks, &p.st.budgets),
        steps: cfg.disturbance.as_ref().map_or(0, |d| d.spec.steps()),
        alpha: cfg.alpha,
        drt: None,
        dhl: None,
        success: true,
        dr: None,
        dropped_packets: 0,
        dropped_transmissions: 0,
        per_task,
    };
    if let Some(e) = &p.event {
        match cfg.framework {
            Framework::BroadcastBaseline => {
                let drt = baseline_drt(cfg, &p.st)?;
                metrics.drt = Some(drt);
                metrics.success = drt <= cfg.alpha;
            }
            _ => match &p.dynamic {
                Some(d) => {
                    let drt = e.enter - e.detect;
                    metrics.drt = Some(drt);
                    metrics.dhl = Some(d.end - e.enter);
                    metrics.success = drt <= cfg.alpha;
                    metrics.dr = Some(degradation_rate(&d.decision, d.sets.periodic.len()));
                    metrics.dropped_packets = d.decision.dropped_packets.len();
                    metrics.dropped_transmissions = d.freed_slots().len();
                }
                None => metrics.success = false,
            },
        }
    }
    Ok(metrics)
}

/// Builds the schedules and simulates every slot of the horizon.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    let p = prepare(cfg)?;
    let (trace, per_task) = simulate(cfg, &p.st, p.event.as_ref(), p.dynamic.as_ref(), p.horizon);
    let metrics = summarize(cfg, &p, per_task)?;
    Ok(RunOutput {
        trace,
        metrics,
        static_result: p.st,
        event: p.event,
        dynamic: p.dynamic,
        dynamic_error: p.dynamic_error,
        horizon: p.horizon,
    })
}

/// Schedule-level metrics without the slot simulation; per-task stats stay empty.
pub fn assess(cfg: &SimConfig) -> Result<Metrics> {
    let p = prepare(cfg)?;
    summarize(cfg, &p, vec![])
}

fn simulate(
    cfg: &SimConfig,
    st: &StaticScheduleResult,
    event: Option<&DisturbanceEvent>,
    dynamic: Option<&DynamicSchedule>,
    horizon: usize,
) -> (SimTrace, Vec<TaskStats>) {
    let net = &cfg.network;
    let tasks = &cfg.tasks;
    let draws = Draws::new(cfg.seed);
    let per_stream = net.links().len() as u64;
    let mut trace = SimTrace::default();
    let mut stats = vec![TaskStats::default(); tasks.len()];
    let mut live: HashMap<Key, Live> = HashMap::new();
    let mut active: BTreeSet<Key> = BTreeSet::new();

    let rhythmic_task = event.map(|e| e.task);
    let vrhy: Vec<NodeId> = match (dynamic, event) {
        (Some(_), Some(e)) => tasks[e.task].path.clone(),
        _ => vec![],
    };
    let actual: Vec<(usize, usize)> = match (dynamic, event) {
        (Some(d), Some(e)) => e.actual_packets(d.end).into_iter().take(d.sets.rhythmic.len()).collect(),
        _ => vec![],
    };
    let window = dynamic.map(|d| (d.start(), d.end));
    let in_window = |t: usize| window.is_some_and(|(a, b)| t >= a && t < b);

    for t in 0..horizon {
        if let (Some(e), Some(d)) = (event, dynamic) {
            if t == e.detect {
                trace.push(t, TraceKind::State, vec![("event", "disturbance-detected".into()), ("task", e.task.to_string())]);
            }
            if t == e.enter {
                trace.push(
                    t,
                    TraceKind::State,
                    vec![("event", "rhythmic-mode".into()), ("end", d.end.to_string()), ("resume", d.sets.resume.to_string())],
                );
            }
        }
        // releases
        for (i, task) in tasks.iter().enumerate() {
            if t % task.period != 0 {
                continue;
            }
            let k = t / task.period;
            if Some(i) == rhythmic_task && dynamic.is_some_and(|d| d.suppresses(k)) {
                continue;
            }
            let key = Key::Periodic(i, k);
            live.insert(key, Live { task: i, deadline: t + task.deadline, progress: 0, hops: task.hops() });
            active.insert(key);
            stats[i].released += 1;
            trace.push(t, TraceKind::State, vec![("event", "released".into()), ("task", i.to_string()), ("packet", k.to_string())]);
        }
        if let (Some(e), Some(_)) = (event, dynamic) {
            for (q, &(r, d)) in actual.iter().enumerate() {
                if r == t {
                    let key = Key::Rhythmic(q);
                    live.insert(key, Live { task: e.task, deadline: d, progress: 0, hops: tasks[e.task].hops() });
                    active.insert(key);
                    stats[e.task].released += 1;
                    trace.push(t, TraceKind::State, vec![("event", "released".into()), ("task", e.task.to_string()), ("packet", format!("r{q}"))]);
                }
            }
        }
        // expiries
        let expired: Vec<Key> = active.iter().copied().filter(|k| live[k].deadline <= t).collect();
        for key in expired {
            active.remove(&key);
            let l = &live[&key];
            let dropped = match (key, dynamic) {
                (Key::Periodic(task, packet), Some(d)) => {
                    d.decision.is_dropped_packet(crate::rhythmic::PeriodicRef { task, packet })
                }
                _ => false,
            };
            let what = if dropped { "dropped-by-decision" } else { "deadline-missed" };
            if dropped {
                stats[l.task].dropped += 1;
            } else {
                stats[l.task].missed += 1;
            }
            let p = label(key);
            trace.push(t, TraceKind::State, vec![("event", what.into()), ("task", l.task.to_string()), ("packet", p)]);
        }

        let a = st.schedule.at(t);
        let dslot = dynamic.map(|d| d.at(t)).unwrap_or(DynSlot::Keep);
        let owner = dynamic.map(|d| d.owner(t, st));
        if a.is_some() || dslot != DynSlot::Keep {
            let dyn_label = match dslot {
                DynSlot::Keep => "keep".to_string(),
                DynSlot::Rhythmic { packet, hop, .. } => match hop {
                    Some(h) => format!("r{packet}.{h}"),
                    None => format!("r{packet}.*"),
                },
            };
            trace.push(t, TraceKind::Sched, vec![("static", slot_label(a)), ("dynamic", dyn_label)]);
        }

        let mut contenders: Vec<Contender> = Vec::new();
        let rhythmic_busy = matches!(dslot, DynSlot::Rhythmic { .. }) && in_window(t);
        if let Some(SlotOwner::Rhythmic { packet, hop, .. }) = owner {
            let key = Key::Rhythmic(packet);
            if active.contains(&key) {
                let l = &live[&key];
                if hop.map_or(true, |h| h == l.progress) && l.progress < l.hops {
                    let task = &tasks[l.task];
                    contenders.push(Contender {
                        key,
                        sender: task.sender(l.progress),
                        receiver: task.receiver(l.progress),
                        priority: cfg.rhythmic_priority,
                        listening: true,
                    });
                }
            }
        }
        if let Some(a) = a {
            let follows_static = Some(a.task) != rhythmic_task || owner.map_or(true, |o| matches!(o, SlotOwner::Periodic(_)));
            let key = Key::Periodic(a.task, a.packet);
            if follows_static && active.contains(&key) {
                let l = &live[&key];
                let task = &tasks[a.task];
                if a.hop.map_or(true, |h| h == l.progress) && l.progress < l.hops {
                    let sender = task.sender(l.progress);
                    let receiver = task.receiver(l.progress);
                    if rhythmic_busy && vrhy.contains(&sender) && Some(a.task) != rhythmic_task {
                        trace.push(
                            t,
                            TraceKind::State,
                            vec![("event", "yielded".into()), ("task", a.task.to_string()), ("packet", a.packet.to_string())],
                        );
                    } else {
                        contenders.push(Contender {
                            key,
                            sender,
                            receiver,
                            priority: cfg.periodic_priority,
                            listening: !(rhythmic_busy && vrhy.contains(&receiver)),
                        });
                    }
                }
            }
        }
        if contenders.is_empty() {
            continue;
        }

        let txs: Vec<ContendingTx> = contenders
            .iter()
            .enumerate()
            .map(|(x, c)| ContendingTx { sender: c.sender, receiver: c.receiver, priority: c.priority, tag: x })
            .collect();
        let tick = cfg.timing.priority_tick_us;
        let success: Vec<bool> = contenders
            .iter()
            .map(|c| {
                let link = net.link_index(c.sender, c.receiver).expect("validated path link");
                let pdr = net.links()[link].pdr;
                let mut ok = c.listening && draws.unit(link as u64, t) < pdr;
                let below = contenders.iter().map(|o| o.priority).filter(|&p| p > c.priority).min();
                if let Some(p) = below {
                    let per = cfg.per.per(tick, p - c.priority);
                    if per > 0.0 {
                        ok &= draws.unit(per_stream + link as u64, t) >= per;
                    }
                }
                ok
            })
            .collect();
        let outcomes = arbitrate_slot(&txs, &cfg.timing, &success).expect("priorities validated");

        for (c, o) in contenders.iter().zip(outcomes) {
            let task_id = live[&c.key].task;
            let p = label(c.key);
            let l = live.get_mut(&c.key).expect("contender is live");
            trace.push(
                t,
                TraceKind::Tx,
                vec![
                    ("sender", net.name(c.sender).to_string()),
                    ("receiver", net.name(c.receiver).to_string()),
                    ("task", task_id.to_string()),
                    ("packet", p.clone()),
                    ("hop", l.progress.to_string()),
                    ("prio", c.priority.to_string()),
                ],
            );
            trace.push(
                t,
                TraceKind::Outcome,
                vec![("task", task_id.to_string()), ("packet", p.clone()), ("result", o.as_str().into())],
            );
            match o {
                Outcome::Delivered => {
                    l.progress += 1;
                    if l.progress == l.hops {
                        active.remove(&c.key);
                        stats[task_id].delivered += 1;
                        trace.push(t, TraceKind::State, vec![("event", "delivered".into()), ("task", task_id.to_string()), ("packet", p)]);
                    } else {
                        trace.push(
                            t,
                            TraceKind::State,
                            vec![("event", "hop-advanced".into()), ("task", task_id.to_string()), ("packet", p), ("hop", l.progress.to_string())],
                        );
                    }
                }
                Outcome::Deferred => {
                    trace.push(t, TraceKind::State, vec![("event", "preempted".into()), ("task", task_id.to_string()), ("packet", p)]);
                }
                Outcome::Lost | Outcome::Collided => {}
            }
        }
    }
    // packets still in flight at the horizon are not counted
    for key in active {
        let l = &live[&key];
        stats[l.task].released -= 1;
    }
    (trace, stats)
}
