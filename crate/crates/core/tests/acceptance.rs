//! Acceptance checks. Each criterion prints one PASS/FAIL line; any failure makes the
//! binary exit non-zero.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rtwn::config::Scenario;
use rtwn::dropping::{
    build_transmission_vectors, drop_transmissions, from_set_cover, greedy_drop_packets, optimal_drop_oracle, periodic_states,
    CandidateSlot, DemandVector, DropDecision, DropKind, DynSlot, PeriodicState, TransmissionVector,
};
use rtwn::mac::contention::{run_contention, ContentionConfig};
use rtwn::mac::{priority_levels, SlotTiming};
use rtwn::model::{packet_pdr, Mode};
use rtwn::rhythmic::{check_idle_slot_theorem, compute_vrhy, full_demand, PeriodicRef};
use rtwn::sim::experiment::{build_trial, TrialParams};
use rtwn::sim::{assess, baseline_drt, run, Framework, Metrics, SimConfig, TraceRecord};
use rtwn::static_scheduler::build_static_schedule_until;

const TESTBED: &str = include_str!("../examples/scenarios/testbed.toml");

const A1_BUDGET: Duration = Duration::from_secs(5);
const A2_BUDGET: Duration = Duration::from_secs(60);
const A4_BUDGET: Duration = Duration::from_secs(30);
const A2_TRIALS: u64 = 1_000;
const A3_TRIALS: u64 = 200;
const A4_INSTANCES: u64 = 200;
const A4_SET_COVERS: u64 = 30;
const A5_INSTANCES: u64 = 50;
const A5_TRIALS: u64 = 100_000;
const A5_PACKETS: usize = 10_000;
const A7_INSTANCES: u64 = 500;
const SIGMAS: f64 = 3.0;
const COST_EPS: f64 = 1e-12;
/// FNV-1a of the testbed trace followed by its metrics CSV.
const A8_DIGEST: u64 = 0xcee4_6ed7_20a1_6a41;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn testbed(framework: Framework) -> SimConfig {
    let mut cfg = Scenario::parse(TESTBED).unwrap().to_sim_config().unwrap();
    cfg.framework = framework;
    cfg
}

fn a1() -> Check {
    let started = Instant::now();
    let pkt = run(&testbed(Framework::DistributedPacket)).map_err(|e| e.to_string())?;
    let trn = run(&testbed(Framework::DistributedTransmission)).map_err(|e| e.to_string())?;
    let cfg = testbed(Framework::DistributedTransmission);
    let dp = pkt.dynamic.as_ref().ok_or("packet level found no dynamic schedule")?;
    let dt = trn.dynamic.as_ref().ok_or("transmission level found no dynamic schedule")?;

    for d in [dp, dt] {
        ensure(d.sets.rhythmic.len() == 5, || format!("{} rhythmic packets", d.sets.rhythmic.len()))?;
        for (i, p) in d.sets.rhythmic.iter().enumerate() {
            let slots = d.rhythmic_slots(i);
            ensure(slots.len() == p.demand as usize && p.demand == 8, || format!("packet {i}: {} of {} slots", slots.len(), p.demand))?;
            ensure(slots.iter().all(|&t| t >= p.release && t < p.deadline), || format!("packet {i} outside its window"))?;
        }
    }

    let st = &trn.static_result;
    let vectors = build_transmission_vectors(&dt.sets, st);
    let states = periodic_states(&dt.sets, st, &cfg.tasks, &cfg.network).map_err(|e| e.to_string())?;
    let opt_p = optimal_drop_oracle(&dt.demand, &vectors, DropKind::Packet, &states, cfg.required).map_err(|e| e.to_string())?;
    let opt_t = optimal_drop_oracle(&dt.demand, &vectors, DropKind::Transmission, &states, cfg.required).map_err(|e| e.to_string())?;
    let (gp, gt) = (dp.decision.total_degradation, dt.decision.total_degradation);
    ensure(gt <= gp + COST_EPS, || format!("transmission {gt} above packet {gp}"))?;
    ensure(opt_t.total_degradation <= opt_p.total_degradation + COST_EPS, || "oracle ordering reversed".into())?;
    ensure(opt_t.total_degradation <= gt + COST_EPS, || "greedy beat the transmission oracle".into())?;
    ensure(opt_p.drop_count() <= dp.decision.drop_count(), || "greedy beat the packet oracle".into())?;

    let tau1 = |k| PeriodicRef { task: 1, packet: k };
    let mut dropped = dp.decision.dropped_packets.clone();
    dropped.sort();
    ensure(dropped == vec![tau1(2), tau1(3)], || format!("packet level dropped {dropped:?}"))?;
    ensure(dt.decision.dropped_slots.iter().all(|(p, _)| p.task == 1), || "transmission level touched another task".into())?;
    let left: Vec<usize> = [2, 3]
        .iter()
        .map(|&k| 6 - dt.decision.dropped_slots.iter().filter(|(p, _)| *p == tau1(k)).count())
        .collect();
    let layout = if left == [4, 4] { "both 6->4".to_string() } else { format!("6->{}/{} (layout needs {} drops)", left[0], left[1], dt.demand.v.iter().sum::<u32>()) };

    let took = started.elapsed();
    ensure(took < A1_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("full demand met; degradation packet {gp:.4} >= transmission {gt:.4} (oracle {:.4}); tau1 {layout}", opt_t.total_degradation))
}

fn trials(params: &TrialParams, n: u64) -> Vec<SimConfig> {
    use rayon::prelude::*;
    (1..=n).into_par_iter().map(|s| build_trial(params, s).expect("trial generation")).collect()
}

fn a2() -> Check {
    let started = Instant::now();
    let params = TrialParams { util: 0.5, alpha_periods: 1, framework: Framework::DistributedTransmission, ..TrialParams::default() };
    let cfgs = trials(&params, A2_TRIALS);
    let runs: Vec<Metrics> = cfgs.iter().map(|c| assess(c).expect("assess")).collect();
    let ok = runs.iter().filter(|m| m.success).count();
    let bad: Vec<u64> = runs.iter().filter(|m| !m.success).map(|m| m.seed).take(5).collect();
    ensure(ok as u64 == A2_TRIALS, || format!("SR {ok}/{A2_TRIALS}, failing seeds {bad:?}"))?;
    let took = started.elapsed();
    ensure(took < A2_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("SR {ok}/{A2_TRIALS} at alpha = P0 in {:.1}s", took.as_secs_f64()))
}

fn a3() -> Check {
    let params = TrialParams { util: 0.5, framework: Framework::BroadcastBaseline, ..TrialParams::default() };
    let cfgs = trials(&params, A3_TRIALS);
    let drts: Vec<(usize, usize)> = cfgs
        .iter()
        .map(|c| {
            let st = build_static_schedule_until(&c.tasks, &c.network, c.mode, c.required, c.horizon.unwrap()).unwrap();
            let p0 = c.tasks[c.disturbance.as_ref().unwrap().task].period;
            (baseline_drt(c, &st).unwrap(), p0)
        })
        .collect();
    let sr: Vec<f64> =
        (1..=6).map(|a| drts.iter().filter(|(d, p0)| *d <= a * p0).count() as f64 / drts.len() as f64).collect();
    ensure(sr.windows(2).all(|w| w[0] <= w[1]), || format!("SR not monotone: {sr:?}"))?;
    ensure(sr[5] == 1.0, || format!("SR at 6 P0 is {}", sr[5]))?;
    let shown: Vec<String> = sr.iter().map(|x| format!("{x:.3}")).collect();
    Ok(format!("baseline SR over alpha = 1..6 P0: [{}]", shown.join(", ")))
}

fn random_packet_instance(rng: &mut ChaCha8Rng) -> (DemandVector, Vec<TransmissionVector>) {
    let windows = rng.gen_range(1..=6);
    let packets = rng.gen_range(1..=12);
    let vectors: Vec<TransmissionVector> = (0..packets)
        .map(|j| TransmissionVector {
            packet: PeriodicRef { task: 1 + j % 3, packet: j },
            epsilon: (0..windows).map(|_| if rng.gen_bool(0.5) { rng.gen_range(1..=3) } else { 0 }).collect(),
        })
        .collect();
    let v = (0..windows)
        .map(|i| {
            let cap: u32 = vectors.iter().map(|x| x.epsilon[i]).sum();
            if cap == 0 {
                0
            } else {
                rng.gen_range(0..=cap.min(4))
            }
        })
        .collect();
    (DemandVector::from_extra(v), vectors)
}

fn random_transmission_instance(rng: &mut ChaCha8Rng) -> (DemandVector, Vec<PeriodicState>) {
    let windows = rng.gen_range(1..=4);
    let packets = rng.gen_range(1..=4);
    let mut slot = 0;
    let states: Vec<PeriodicState> = (0..packets)
        .map(|j| {
            let hops = rng.gen_range(1..=3);
            let pdrs: Vec<f64> = (0..hops).map(|_| rng.gen_range(0.85..1.0)).collect();
            let retries: Vec<u32> = (0..hops).map(|_| rng.gen_range(1..=3)).collect();
            let mut slots = Vec::new();
            for (h, &r) in retries.iter().enumerate() {
                for _ in 0..r {
                    let window = rng.gen_bool(0.7).then(|| rng.gen_range(0..windows));
                    slots.push(CandidateSlot { slot, hop: Some(h), window });
                    slot += 1;
                }
            }
            PeriodicState { packet: PeriodicRef { task: 1, packet: j }, mode: Mode::Tbs, pdrs, retries, slots }
        })
        .collect();
    let v = (0..windows)
        .map(|i| {
            let cap = states.iter().flat_map(|s| &s.slots).filter(|c| c.window == Some(i)).count() as u32;
            if cap == 0 {
                0
            } else {
                rng.gen_range(0..=cap.min(3))
            }
        })
        .collect();
    (DemandVector::from_extra(v), states)
}

fn covers_packets(d: &DemandVector, vectors: &[TransmissionVector], dec: &DropDecision) -> bool {
    d.v.iter().enumerate().all(|(i, &vi)| {
        vectors.iter().filter(|x| dec.is_dropped_packet(x.packet)).map(|x| x.epsilon[i]).sum::<u32>() >= vi
    })
}

fn covers_slots(d: &DemandVector, states: &[PeriodicState], dec: &DropDecision) -> bool {
    let dropped: BTreeSet<usize> = dec.dropped_slots.iter().map(|x| x.1).collect();
    d.v.iter().enumerate().all(|(i, &vi)| {
        states.iter().flat_map(|s| &s.slots).filter(|c| c.window == Some(i) && dropped.contains(&c.slot)).count() as u32 >= vi
    })
}

fn min_set_cover(n: usize, subsets: &[Vec<usize>]) -> usize {
    let full = (1u32 << n) - 1;
    let masks: Vec<u32> = subsets.iter().map(|s| s.iter().fold(0, |m, &x| m | 1 << x)).collect();
    (0u32..1 << masks.len())
        .filter(|pick| masks.iter().enumerate().filter(|(j, _)| pick >> j & 1 == 1).fold(0, |m, (_, &s)| m | s) == full)
        .map(|pick| pick.count_ones() as usize)
        .min()
        .expect("instance is coverable")
}

fn a4() -> Check {
    let started = Instant::now();
    let required = 0.99;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..A4_INSTANCES {
        let (d, vectors) = random_packet_instance(&mut rng);
        let g = greedy_drop_packets(&d, &vectors, required).map_err(|e| format!("packet case {case}: {e}"))?;
        let o = optimal_drop_oracle(&d, &vectors, DropKind::Packet, &[], required).map_err(|e| e.to_string())?;
        ensure(covers_packets(&d, &vectors, &g), || format!("packet case {case}: greedy leaves demand"))?;
        ensure(g.drop_count() >= o.drop_count(), || format!("packet case {case}: greedy below oracle"))?;

        let (d, states) = random_transmission_instance(&mut rng);
        let g = drop_transmissions(&d, &states, required).map_err(|e| format!("slot case {case}: {e}"))?;
        let o = optimal_drop_oracle(&d, &[], DropKind::Transmission, &states, required).map_err(|e| e.to_string())?;
        ensure(covers_slots(&d, &states, &g), || format!("slot case {case}: greedy leaves demand"))?;
        ensure(g.total_degradation >= o.total_degradation - COST_EPS, || format!("slot case {case}: greedy below oracle"))?;
    }
    for case in 0..A4_SET_COVERS {
        let n = rng.gen_range(2..=8);
        let mut subsets: Vec<Vec<usize>> = (0..rng.gen_range(2..=10))
            .map(|_| {
                let s: BTreeSet<usize> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(0..n)).collect();
                s.into_iter().collect()
            })
            .collect();
        let seen: BTreeSet<usize> = subsets.iter().flatten().copied().collect();
        let missing: Vec<usize> = (0..n).filter(|x| !seen.contains(x)).collect();
        if !missing.is_empty() {
            subsets.push(missing);
        }
        let (d, vectors) = from_set_cover(n, &subsets).map_err(|e| e.to_string())?;
        let o = optimal_drop_oracle(&d, &vectors, DropKind::Packet, &[], required).map_err(|e| e.to_string())?;
        let best = min_set_cover(n, &subsets);
        ensure(o.drop_count() == best, || format!("set cover {case}: oracle {} vs brute force {best}", o.drop_count()))?;
    }
    let took = started.elapsed();
    ensure(took < A4_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("{A4_INSTANCES} packet and {A4_INSTANCES} transmission instances, {A4_SET_COVERS} set covers"))
}

fn a5() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for case in 0..A5_INSTANCES {
        let hops = rng.gen_range(1..=6);
        let pdrs: Vec<f64> = (0..hops).map(|_| rng.gen_range(0.5..1.0)).collect();
        let retries: Vec<u32> = (0..hops).map(|_| rng.gen_range(1..=4)).collect();
        let exact = packet_pdr(&pdrs, &retries).map_err(|e| e.to_string())?;
        let mut ok = 0u64;
        for _ in 0..A5_TRIALS {
            let delivered = pdrs.iter().zip(&retries).all(|(&p, &r)| (0..r).any(|_| rng.gen_bool(p)));
            ok += delivered as u64;
        }
        let est = ok as f64 / A5_TRIALS as f64;
        let se = (exact * (1.0 - exact) / A5_TRIALS as f64).sqrt().max(1e-9);
        let z = (est - exact).abs() / se;
        worst = worst.max(z);
        ensure(z <= SIGMAS, || format!("case {case}: exact {exact:.5} vs sampled {est:.5} ({z:.2} SE)"))?;
    }

    let mut cfg = Scenario::parse(TESTBED).unwrap().to_sim_config().unwrap();
    cfg.disturbance = None;
    let max_p = cfg.tasks.iter().map(|t| t.period).max().unwrap();
    cfg.horizon = Some(A5_PACKETS * max_p);
    let out = run(&cfg).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for (i, s) in out.metrics.per_task.iter().enumerate() {
        let n = s.delivered + s.missed + s.dropped;
        ensure(n as usize >= A5_PACKETS, || format!("task {i}: only {n} packets"))?;
        let ratio = s.delivered as f64 / n as f64;
        let sigma = (cfg.required * (1.0 - cfg.required) / n as f64).sqrt();
        ensure(ratio >= cfg.required - SIGMAS * sigma, || format!("task {i}: delivery {ratio:.4} over {n}"))?;
        ratios.push(format!("{ratio:.4}"));
    }
    Ok(format!("worst Monte-Carlo gap {worst:.2} SE; testbed delivery [{}]", ratios.join(", ")))
}

fn a6() -> Check {
    let l400 = priority_levels(&SlotTiming::with_tick(400).unwrap());
    let l60 = priority_levels(&SlotTiming::with_tick(60).unwrap());
    ensure(l400 == 3 && l60 == 14, || format!("levels {l400} and {l60}"))?;
    let mut shown = Vec::new();
    for tick in [60, 100, 200, 400] {
        let cfg = ContentionConfig { timing: SlotTiming::with_tick(tick).unwrap(), ..ContentionConfig::default() };
        let s = run_contention(&cfg).map_err(|e| e.to_string())?;
        ensure(s[0].dropped == 0 && s[0].drop_rate() == 0.0, || format!("tick {tick}: high priority dropped {}", s[0].dropped))?;
        let lat: Vec<f64> = s.iter().map(|x| x.mean_latency_ms()).collect();
        ensure(lat[0] < lat[1] && lat[1] < lat[2], || format!("tick {tick}: latencies {lat:?}"))?;
        shown.push(format!("{tick}us {:.0}/{:.0}/{:.0}ms", lat[0], lat[1], lat[2]));
    }
    Ok(format!("levels 3 and 14; high-priority loss 0; latency {}", shown.join(", ")))
}

fn release_of(cfg: &SimConfig, r: &TraceRecord) -> Option<Option<usize>> {
    let task: usize = r.get("task")?.parse().ok()?;
    let packet = r.get("packet")?;
    Some(packet.parse::<usize>().ok().map(|k| cfg.tasks[task].release(k)))
}

/// Records a run keeps once the static schedule is back in force: everything at or after
/// `end` except traffic of packets released before it.
fn after(cfg: &SimConfig, recs: &[TraceRecord], end: usize) -> Vec<String> {
    recs.iter()
        .filter(|r| r.slot >= end)
        .filter(|r| match release_of(cfg, r) {
            None => true,
            Some(Some(rel)) => rel >= end,
            Some(None) => false,
        })
        .map(|r| r.to_string())
        .collect()
}

fn a7() -> Check {
    use rayon::prelude::*;
    let params = TrialParams { util: 0.5, framework: Framework::DistributedTransmission, ..TrialParams::default() };
    let results: Vec<Result<(), String>> = (1..=A7_INSTANCES)
        .into_par_iter()
        .map(|seed| {
            let cfg = build_trial(&params, seed).map_err(|e| e.to_string())?;
            let out = run(&cfg).map_err(|e| e.to_string())?;
            let d = out.dynamic.as_ref().ok_or_else(|| format!("seed {seed}: {:?}", out.dynamic_error))?;
            let st = &out.static_result;
            let e = &d.event;
            let retries = &st.retries[e.task];
            let lossy = full_demand(retries, true) as usize > retries.len();
            let f_last = e.earliest_last_finish(full_demand(retries, lossy));
            ensure(f_last <= d.end && d.end <= e.upper_bound(cfg.beta), || {
                format!("seed {seed}: end {} outside [{f_last}, {}]", d.end, e.upper_bound(cfg.beta))
            })?;
            for t in e.enter..d.end {
                if let DynSlot::Rhythmic { .. } = d.at(t) {
                    let legal = match st.schedule.at(t) {
                        None => true,
                        Some(a) => {
                            a.task == e.task
                                || d.decision.is_dropped_packet(PeriodicRef { task: a.task, packet: a.packet })
                                || d.freed_slots().contains(&t)
                        }
                    };
                    ensure(legal, || format!("seed {seed}: rhythmic slot {t} displaces a kept transmission"))?;
                }
            }
            for node in compute_vrhy(&cfg.tasks[e.task]) {
                if let Some(c) = check_idle_slot_theorem(e, st, &cfg.tasks, node, |t| d.slot_use(t, st, &cfg.tasks)) {
                    ensure(!c.violated(), || format!("seed {seed}: node {node} has no idle slot in ({}, {})", c.t1, c.t2))?;
                }
            }
            let mut calm = cfg.clone();
            calm.disturbance = None;
            let base = run(&calm).map_err(|e| e.to_string())?;
            let a = after(&cfg, &out.trace.records, d.end);
            let b = after(&cfg, &base.trace.records, d.end);
            ensure(a == b, || {
                let i = a.iter().zip(&b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
                format!("seed {seed}: traces diverge after the end point at {:?} vs {:?}", a.get(i), b.get(i))
            })?;
            Ok(())
        })
        .collect();
    let errs: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    ensure(errs.is_empty(), || format!("{} violations, first: {}", errs.len(), errs[0]))?;
    Ok(format!("{A7_INSTANCES} instances, 0 violations"))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn rendered(cfg: &SimConfig) -> Vec<u8> {
    let out = run(cfg).unwrap();
    let mut bytes = out.trace.render().into_bytes();
    Metrics::write_csv(&[out.metrics], &mut bytes).unwrap();
    bytes
}

fn a8() -> Check {
    let tb = testbed(Framework::DistributedTransmission);
    let first = rendered(&tb);
    ensure(first == rendered(&tb), || "testbed run differs between runs".into())?;
    for seed in [11, 12, 13] {
        for framework in [Framework::DistributedPacket, Framework::BroadcastBaseline] {
            let params = TrialParams { framework, ..TrialParams::default() };
            let cfg = build_trial(&params, seed).map_err(|e| e.to_string())?;
            ensure(rendered(&cfg) == rendered(&cfg), || format!("seed {seed} {framework} differs between runs"))?;
        }
    }
    let digest = fnv1a(&first);
    ensure(digest == A8_DIGEST, || format!("testbed digest {digest:#018x}, pinned {A8_DIGEST:#018x}"))?;
    Ok(format!("identical bytes across runs; testbed digest {digest:#018x}"))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 8] =
        [("A1", a1), ("A2", a2), ("A3", a3), ("A4", a4), ("A5", a5), ("A6", a6), ("A7", a7), ("A8", a8)];
    let mut failed = 0;
    for (id, f) in checks {
        let started = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = started.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("{id} PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("{id} FAIL ({secs:.1}s) {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
