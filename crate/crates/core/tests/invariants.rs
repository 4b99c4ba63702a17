use proptest::prelude::*;

use rtwn::dropping::{
    greedy_drop_packets, optimal_drop_oracle, DemandVector, DropKind, DynSlot, TransmissionVector,
};
use rtwn::mac::{adjusted_tx_offset, priority_levels, SlotTiming};
use rtwn::model::{meets, packet_pdr, pbs_pdr};
use rtwn::rhythmic::PeriodicRef;
use rtwn::sim::experiment::{build_trial, TrialParams};
use rtwn::sim::{run, Framework};
use rtwn::static_scheduler::{allocate_retry_vector, verify_schedulable};

fn path() -> impl Strategy<Value = (Vec<f64>, Vec<u32>)> {
    (1usize..6).prop_flat_map(|h| (prop::collection::vec(0.3f64..1.0, h), prop::collection::vec(1u32..5, h)))
}

fn packet_instance() -> impl Strategy<Value = (Vec<u32>, Vec<Vec<u32>>)> {
    (1usize..5, 1usize..8).prop_flat_map(|(w, n)| {
        (prop::collection::vec(0u32..3, w), prop::collection::vec(prop::collection::vec(0u32..3, w), n))
    })
}

fn small_trial() -> TrialParams {
    TrialParams { grid_width: 5, grid_height: 5, max_instance: 8, ..TrialParams::default() }
}

proptest! {
    #[test]
    fn pdr_grows_with_retries((pdrs, retries) in path(), hop in 0usize..6) {
        let base = packet_pdr(&pdrs, &retries).unwrap();
        prop_assert!(base > 0.0 && base <= 1.0);
        let mut more = retries.clone();
        let h = hop % more.len();
        more[h] += 1;
        prop_assert!(packet_pdr(&pdrs, &more).unwrap() >= base);
    }

    #[test]
    fn pbs_grows_with_slots((pdrs, _) in path(), extra in 0usize..6) {
        let h = pdrs.len();
        prop_assert!(pbs_pdr(&pdrs, h + extra + 1) >= pbs_pdr(&pdrs, h + extra) - 1e-12);
    }

    #[test]
    fn allocated_retries_meet_target((pdrs, _) in path(), required in 0.5f64..0.999) {
        let r = allocate_retry_vector(&pdrs, required).unwrap();
        prop_assert!(meets(packet_pdr(&pdrs, &r).unwrap(), required));
    }

    #[test]
    fn offsets_strictly_increase(tick in 20u32..800) {
        let timing = SlotTiming::with_tick(tick).unwrap();
        let levels = priority_levels(&timing);
        let offs: Vec<u32> = (0..levels).map(|p| adjusted_tx_offset(&timing, p).unwrap()).collect();
        prop_assert!(offs.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(adjusted_tx_offset(&timing, levels).is_err());
    }

    #[test]
    fn greedy_covers_and_never_beats_oracle((v, eps) in packet_instance()) {
        let vectors: Vec<TransmissionVector> = eps
            .into_iter()
            .enumerate()
            .map(|(j, epsilon)| TransmissionVector { packet: PeriodicRef { task: 1, packet: j }, epsilon })
            .collect();
        let cap: Vec<u32> = (0..v.len()).map(|i| vectors.iter().map(|x| x.epsilon[i]).sum()).collect();
        let v: Vec<u32> = v.iter().zip(&cap).map(|(&a, &c)| a.min(c)).collect();
        let d = DemandVector::from_extra(v.clone());
        let g = greedy_drop_packets(&d, &vectors, 0.99).unwrap();
        let o = optimal_drop_oracle(&d, &vectors, DropKind::Packet, &[], 0.99).unwrap();
        for (i, &vi) in v.iter().enumerate() {
            let got: u32 = vectors.iter().filter(|x| g.is_dropped_packet(x.packet)).map(|x| x.epsilon[i]).sum();
            prop_assert!(got >= vi);
        }
        prop_assert!(g.drop_count() >= o.drop_count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn generated_static_schedules_verify(seed in 0u64..10_000) {
        let cfg = build_trial(&small_trial(), seed).unwrap();
        let out = run(&cfg).unwrap();
        let verdict = verify_schedulable(&out.static_result, &cfg.tasks, &cfg.network, cfg.required);
        prop_assert!(verdict.passed(), "{:?}", verdict.first());
    }

    #[test]
    fn rhythmic_slots_only_take_free_slots(seed in 0u64..10_000, packet_level in any::<bool>()) {
        let framework = if packet_level { Framework::DistributedPacket } else { Framework::DistributedTransmission };
        let cfg = build_trial(&TrialParams { framework, ..small_trial() }, seed).unwrap();
        let out = run(&cfg).unwrap();
        let d = out.dynamic.as_ref().unwrap();
        let st = &out.static_result;
        for t in d.start()..d.end {
            if let (DynSlot::Rhythmic { .. }, Some(a)) = (d.at(t), st.schedule.at(t)) {
                let p = PeriodicRef { task: a.task, packet: a.packet };
                prop_assert!(a.task == d.event.task || d.decision.is_dropped_packet(p) || d.freed_slots().contains(&t));
            }
        }
        for i in 0..d.sets.rhythmic.len() {
            prop_assert_eq!(d.rhythmic_slots(i).len(), d.sets.rhythmic[i].demand as usize);
        }
    }

    #[test]
    fn packets_are_conserved(seed in 0u64..10_000) {
        let cfg = build_trial(&small_trial(), seed).unwrap();
        let out = run(&cfg).unwrap();
        for (t, s) in cfg.tasks.iter().zip(&out.metrics.per_task) {
            let settled = s.delivered + s.missed + s.dropped;
            prop_assert!(settled <= s.released);
            prop_assert!(s.released - settled <= t.deadline.div_ceil(t.period) as u64);
        }
    }

    #[test]
    fn runs_are_deterministic(seed in 0u64..10_000) {
        let cfg = build_trial(&small_trial(), seed).unwrap();
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        prop_assert_eq!(a.trace.render(), b.trace.render());
        prop_assert_eq!(a.metrics, b.metrics);
    }
}
