use super::{CandidateSlot, DemandVector, DropDecision, DropKind, PeriodicState};
use crate::error::{Error, Result};

const COST_TIE: f64 = 1e-12;

/// Removes single periodic transmissions, cheapest added degradation first, until every
/// rhythmic window has its extra slots. A cheapest slot that no pending window can use is
/// set aside for good. Ties go to the earlier packet in `states`, then the earlier slot.
pub fn drop_transmissions(demand: &DemandVector, states: &[PeriodicState], required: f64) -> Result<DropDecision> {
    let mut v = demand.v.clone();
    let mut removed: Vec<Vec<CandidateSlot>> = vec![Vec::new(); states.len()];
    let mut blocked: Vec<Vec<bool>> = states.iter().map(|s| vec![false; s.slots.len()]).collect();
    let mut taken: Vec<Vec<bool>> = blocked.clone();
    let mut current: Vec<f64> = states.iter().map(|s| s.degradation_without(&[], required)).collect();
    let mut order = Vec::new();

    while v.iter().any(|&x| x > 0) {
        let mut best: Option<(f64, usize, usize)> = None;
        for (j, s) in states.iter().enumerate() {
            let mut seen_hops: Vec<Option<usize>> = Vec::new();
            for (x, c) in s.slots.iter().enumerate() {
                if taken[j][x] || blocked[j][x] || seen_hops.contains(&c.hop) {
                    continue;
                }
                // slots of one packet and hop cost the same; the earliest stands for all
                seen_hops.push(c.hop);
                let mut trial = removed[j].clone();
                trial.push(*c);
                let cost = s.degradation_without(&trial, required) - current[j];
                let better = match best {
                    None => true,
                    Some((bc, bj, bx)) => {
                        cost < bc - COST_TIE || (cost <= bc + COST_TIE && (j, c.slot) < (bj, states[bj].slots[bx].slot))
                    }
                };
                if better {
                    best = Some((cost, j, x));
                }
            }
        }
        let Some((_, j, x)) = best else {
            return Err(Error::Unsatisfiable(format!("extra demand {v:?} left after every transmission was considered")));
        };
        let c = states[j].slots[x];
        match c.window {
            Some(w) if v[w] > 0 => {
                v[w] -= 1;
                taken[j][x] = true;
                removed[j].push(c);
                current[j] = states[j].degradation_without(&removed[j], required);
                order.push((states[j].packet, c.slot));
            }
            _ => blocked[j][x] = true,
        }
    }

    let mut degradations = Vec::new();
    let mut dropped_packets = Vec::new();
    for (j, s) in states.iter().enumerate() {
        if removed[j].is_empty() {
            continue;
        }
        degradations.push((s.packet, current[j]));
        if s.pdr_without(&removed[j]) <= 0.0 {
            dropped_packets.push(s.packet);
        }
    }
    let total_degradation = degradations.iter().map(|d| d.1).sum();
    Ok(DropDecision { kind: DropKind::Transmission, dropped_packets, dropped_slots: order, degradations, total_degradation })
}
