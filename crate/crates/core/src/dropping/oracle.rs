use super::{CandidateSlot, DemandVector, DropDecision, DropKind, PeriodicState, TransmissionVector};
use crate::error::{Error, Result};

pub const ORACLE_MAX_PACKETS: usize = 22;
/// Upper bound on the number of per-group count combinations explored.
pub const ORACLE_MAX_SLOTS: u64 = 1 << 22;

/// Exhaustive minimum: fewest dropped packets, or least total degradation when dropping
/// transmissions. Packet-level ties go to the lexicographically first subset.
pub fn optimal_drop_oracle(
    demand: &DemandVector,
    vectors: &[TransmissionVector],
    kind: DropKind,
    states: &[PeriodicState],
    required: f64,
) -> Result<DropDecision> {
    match kind {
        DropKind::Packet => packet_oracle(demand, vectors, required),
        DropKind::Transmission => transmission_oracle(demand, states, required),
    }
}

fn packet_oracle(demand: &DemandVector, vectors: &[TransmissionVector], required: f64) -> Result<DropDecision> {
    let m = vectors.len();
    if m > ORACLE_MAX_PACKETS {
        return Err(Error::TooLarge(format!("{m} periodic packets")));
    }
    let covers = |subset: &[usize]| {
        demand.v.iter().enumerate().all(|(i, &vi)| subset.iter().map(|&j| vectors[j].epsilon[i]).sum::<u32>() >= vi)
    };
    for k in 0..=m {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            if covers(&idx) {
                return Ok(DropDecision::packets(idx.iter().map(|&j| vectors[j].packet).collect(), required));
            }
            // next k-combination of 0..m in lexicographic order
            let Some(pos) = (0..k).rev().find(|&p| idx[p] < m - k + p) else { break };
            idx[pos] += 1;
            for q in pos + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    Err(Error::Unsatisfiable(format!("extra demand {:?} exceeds all periodic slots", demand.v)))
}

struct Group {
    state: usize,
    window: usize,
    slots: Vec<CandidateSlot>,
}

fn transmission_oracle(demand: &DemandVector, states: &[PeriodicState], required: f64) -> Result<DropDecision> {
    let mut groups: Vec<Group> = Vec::new();
    for (j, s) in states.iter().enumerate() {
        for c in &s.slots {
            let Some(w) = c.window else { continue };
            if demand.v[w] == 0 {
                continue;
            }
            match groups.iter_mut().find(|g| g.state == j && g.window == w && g.slots[0].hop == c.hop) {
                Some(g) => g.slots.push(*c),
                None => groups.push(Group { state: j, window: w, slots: vec![*c] }),
            }
        }
    }
    let space = groups.iter().try_fold(1u64, |acc, g| acc.checked_mul(g.slots.len() as u64 + 1));
    match space {
        Some(n) if n <= ORACLE_MAX_SLOTS => {}
        _ => return Err(Error::TooLarge(format!("{} slot groups", groups.len()))),
    }

    let mut counts = vec![0usize; groups.len()];
    let mut best: Option<(f64, usize, Vec<usize>)> = None;
    loop {
        let mut per_window = vec![0u32; demand.v.len()];
        for (g, &c) in groups.iter().zip(&counts) {
            per_window[g.window] += c as u32;
        }
        if per_window.iter().zip(&demand.v).all(|(a, b)| a >= b) {
            let cost = cost_of(&groups, &counts, states, required);
            let n: usize = counts.iter().sum();
            let better = match &best {
                None => true,
                Some((bc, bn, _)) => cost < bc - 1e-12 || (cost <= bc + 1e-12 && n < *bn),
            };
            if better {
                best = Some((cost, n, counts.clone()));
            }
        }
        // odometer over group counts
        let mut g = 0;
        loop {
            if g == groups.len() {
                return finish(best, &groups, states, required, demand);
            }
            if counts[g] < groups[g].slots.len() {
                counts[g] += 1;
                break;
            }
            counts[g] = 0;
            g += 1;
        }
    }
}

fn removed_per_state(groups: &[Group], counts: &[usize], n_states: usize) -> Vec<Vec<CandidateSlot>> {
    let mut removed = vec![Vec::new(); n_states];
    for (g, &c) in groups.iter().zip(counts) {
        removed[g.state].extend_from_slice(&g.slots[..c]);
    }
    removed
}

fn cost_of(groups: &[Group], counts: &[usize], states: &[PeriodicState], required: f64) -> f64 {
    removed_per_state(groups, counts, states.len())
        .iter()
        .zip(states)
        .filter(|(r, _)| !r.is_empty())
        .map(|(r, s)| s.degradation_without(r, required))
        .sum()
}

fn finish(
    best: Option<(f64, usize, Vec<usize>)>,
    groups: &[Group],
    states: &[PeriodicState],
    required: f64,
    demand: &DemandVector,
) -> Result<DropDecision> {
    let Some((total, _, counts)) = best else {
        return Err(Error::Unsatisfiable(format!("extra demand {:?} exceeds all periodic slots", demand.v)));
    };
    let removed = removed_per_state(groups, &counts, states.len());
    let mut d = DropDecision::empty(DropKind::Transmission);
    for (r, s) in removed.iter().zip(states) {
        if r.is_empty() {
            continue;
        }
        d.degradations.push((s.packet, s.degradation_without(r, required)));
        if s.pdr_without(r) <= 0.0 {
            d.dropped_packets.push(s.packet);
        }
        let mut slots: Vec<usize> = r.iter().map(|c| c.slot).collect();
        slots.sort_unstable();
        d.dropped_slots.extend(slots.into_iter().map(|t| (s.packet, t)));
    }
    d.total_degradation = total;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mode;
    use crate::rhythmic::PeriodicRef;

    fn tv(k: usize, eps: Vec<u32>) -> TransmissionVector {
        TransmissionVector { packet: PeriodicRef { task: 1, packet: k }, epsilon: eps }
    }

    #[test]
    fn packet_optimum() {
        let vs = vec![tv(1, vec![1, 0]), tv(2, vec![0, 1]), tv(3, vec![1, 1])];
        let d = optimal_drop_oracle(&DemandVector::from_extra(vec![1, 1]), &vs, DropKind::Packet, &[], 0.99).unwrap();
        assert_eq!(d.dropped_packets, vec![PeriodicRef { task: 1, packet: 3 }]);
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let vs = vec![tv(1, vec![1])];
        let d = optimal_drop_oracle(&DemandVector::from_extra(vec![0]), &vs, DropKind::Packet, &[], 0.99).unwrap();
        assert!(d.dropped_packets.is_empty());
        let d = optimal_drop_oracle(&DemandVector::from_extra(vec![0]), &[], DropKind::Transmission, &[], 0.99).unwrap();
        assert_eq!(d.total_degradation, 0.0);
    }

    #[test]
    fn spreads_losses_across_packets() {
        // two slots from one packet kill it; one slot from each costs 0.09 twice
        let mk = |task, slots: [usize; 2]| PeriodicState {
            packet: PeriodicRef { task, packet: 0 },
            mode: Mode::Tbs,
            pdrs: vec![0.9],
            retries: vec![2],
            slots: slots.iter().map(|&t| CandidateSlot { slot: t, hop: Some(0), window: Some(0) }).collect(),
        };
        let states = vec![mk(1, [1, 2]), mk(2, [3, 4])];
        let d = optimal_drop_oracle(&DemandVector::from_extra(vec![2]), &[], DropKind::Transmission, &states, 0.99).unwrap();
        assert!((d.total_degradation - 0.18).abs() < 1e-9);
        assert_eq!(d.dropped_slots.len(), 2);
        assert!(d.dropped_packets.is_empty());
    }
}
