//! End-to-end delivery ratio of a packet and the degradation bookkeeping
//! used by the dropping solvers.

use crate::error::{Error, Result};

/// Slack used whenever a computed delivery ratio is compared against a target.
pub const PDR_EPS: f64 = 1e-12;

/// Delivery ratio of a packet that gets `retries[h]` trials on a hop with link PDR `pdrs[h]`.
pub fn packet_pdr(pdrs: &[f64], retries: &[u32]) -> Result<f64> {
    if pdrs.len() != retries.len() {
        return Err(Error::Contract(format!(
            "{} link PDRs but {} retry entries",
            pdrs.len(),
            retries.len()
        )));
    }
    if pdrs.is_empty() {
        return Err(Error::Contract("empty path".into()));
    }
    Ok(pdr_product(pdrs, retries))
}

pub(crate) fn pdr_product(pdrs: &[f64], retries: &[u32]) -> f64 {
    pdrs.iter()
        .zip(retries)
        .map(|(&p, &r)| hop_success(p, r))
        .product()
}

pub(crate) fn hop_success(p: f64, r: u32) -> f64 {
    if r == 0 {
        0.0
    } else {
        1.0 - (1.0 - p).powi(r as i32)
    }
}

pub fn pdr_degradation(required: f64, achieved: f64) -> f64 {
    (required - achieved).max(0.0)
}

pub fn meets(achieved: f64, required: f64) -> bool {
    achieved + PDR_EPS >= required
}

/// Delivery ratio when the packet owns `slots` unlabelled slots and the holder of the
/// packet decides the hop at run time. Probability that all hops complete.
pub fn pbs_pdr(pdrs: &[f64], slots: usize) -> f64 {
    let h = pdrs.len();
    if h == 0 {
        return 1.0;
    }
    // dist[j] = probability the packet sits before hop j after the slots processed so far
    let mut dist = vec![0.0; h + 1];
    dist[0] = 1.0;
    for _ in 0..slots {
        let mut next = vec![0.0; h + 1];
        next[h] = dist[h];
        for j in 0..h {
            next[j + 1] += dist[j] * pdrs[j];
            next[j] += dist[j] * (1.0 - pdrs[j]);
        }
        dist = next;
    }
    dist[h]
}
