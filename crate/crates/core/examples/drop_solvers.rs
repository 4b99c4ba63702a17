//! Greedy dropping against the exhaustive oracle, and the set-cover reduction.

use rtwn::dropping::{
    drop_transmissions, from_set_cover, greedy_drop_packets, optimal_drop_oracle, CandidateSlot, DemandVector, DropKind,
    PeriodicState,
};
use rtwn::model::Mode;
use rtwn::rhythmic::PeriodicRef;

fn main() -> rtwn::Result<()> {
    let subsets = vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5], vec![0, 5], vec![1, 4]];
    let (demand, vectors) = from_set_cover(6, &subsets)?;
    let greedy = greedy_drop_packets(&demand, &vectors, 0.99)?;
    let best = optimal_drop_oracle(&demand, &vectors, DropKind::Packet, &[], 0.99)?;
    let ids = |d: &rtwn::dropping::DropDecision| d.dropped_packets.iter().map(|p| p.task - 1).collect::<Vec<_>>();
    println!("set cover: greedy picks {:?}, optimum {:?}", ids(&greedy), ids(&best));

    let state = |k, pdr: f64, retries: Vec<u32>, first: usize, window: usize| {
        let mut slots = Vec::new();
        let mut t = first;
        for (h, &r) in retries.iter().enumerate() {
            for _ in 0..r {
                slots.push(CandidateSlot { slot: t, hop: Some(h), window: Some(window) });
                t += 1;
            }
        }
        PeriodicState { packet: PeriodicRef { task: 1, packet: k }, mode: Mode::Tbs, pdrs: vec![pdr; retries.len()], retries, slots }
    };
    let states = vec![state(0, 0.9, vec![2, 2], 0, 0), state(1, 0.95, vec![3, 2], 10, 0)];
    let demand = DemandVector::from_extra(vec![3]);
    let greedy = drop_transmissions(&demand, &states, 0.99)?;
    let best = optimal_drop_oracle(&demand, &[], DropKind::Transmission, &states, 0.99)?;
    println!("transmissions: greedy drops {:?} for {:.4}", greedy.dropped_slots.iter().map(|x| x.1).collect::<Vec<_>>(), greedy.total_degradation);
    println!("               oracle drops {:?} for {:.4}", best.dropped_slots.iter().map(|x| x.1).collect::<Vec<_>>(), best.total_degradation);
    Ok(())
}
