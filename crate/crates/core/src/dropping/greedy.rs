use super::{DemandVector, DropDecision, TransmissionVector};
use crate::error::{Error, Result};

fn clip(eps: &[u32], v: &[u32]) -> Vec<u32> {
    eps.iter().zip(v).map(|(&e, &vi)| e.min(vi)).collect()
}

/// Drops whole periodic packets, largest clipped coverage first, until every rhythmic
/// window has its extra slots. `vectors` must be in packet order; ties keep that order.
pub fn greedy_drop_packets(demand: &DemandVector, vectors: &[TransmissionVector], required: f64) -> Result<DropDecision> {
    let mut v = demand.v.clone();
    let mut eps: Vec<Option<Vec<u32>>> = vectors.iter().map(|tv| Some(clip(&tv.epsilon, &v))).collect();
    let mut dropped = Vec::new();
    while v.iter().any(|&x| x > 0) {
        let mut best: Option<(usize, u32)> = None;
        for (j, e) in eps.iter().enumerate() {
            let Some(e) = e else { continue };
            let s: u32 = e.iter().sum();
            if s > 0 && best.map_or(true, |(_, bs)| s > bs) {
                best = Some((j, s));
            }
        }
        let Some((j, _)) = best else {
            return Err(Error::Unsatisfiable(format!("extra demand {v:?} left after dropping every useful packet")));
        };
        let taken = eps[j].take().expect("candidate still present");
        for (vi, e) in v.iter_mut().zip(&taken) {
            *vi -= e;
        }
        for e in eps.iter_mut().flatten() {
            *e = clip(e, &v);
        }
        dropped.push(vectors[j].packet);
    }
    Ok(DropDecision::packets(dropped, required))
}
