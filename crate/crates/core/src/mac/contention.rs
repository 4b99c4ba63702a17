//! Three senders sharing one slot per slotframe, each retrying after a loss.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{arbitrate_slot, ContendingTx, Outcome, PerModel, SlotTiming};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ContentionConfig {
    pub timing: SlotTiming,
    pub per: PerModel,
    /// Priority level of each sender.
    pub priorities: Vec<u32>,
    pub link_pdr: f64,
    pub slotframe_ms: f64,
    /// Attempts after the first before a packet is dropped.
    pub max_retries: u32,
    /// Probability that a sender generates a packet in a slotframe.
    pub load: f64,
    pub frames: usize,
    pub seed: u64,
    /// Whether yielding to a higher-priority sender uses up an attempt.
    pub deferral_consumes_retry: bool,
}

impl Default for ContentionConfig {
    fn default() -> Self {
        Self {
            timing: SlotTiming::default(),
            per: PerModel::default(),
            priorities: vec![0, 1, 2],
            link_pdr: 1.0,
            slotframe_ms: 165.0,
            max_retries: 5,
            load: 0.3,
            frames: 20_000,
            seed: 1,
            deferral_consumes_retry: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SenderStats {
    pub priority: u32,
    pub generated: u64,
    pub delivered: u64,
    pub dropped: u64,
    pub latency_sum_ms: f64,
}

impl SenderStats {
    /// Dropped over generated packets.
    pub fn drop_rate(&self) -> f64 {
        if self.generated == 0 {
            0.0
        } else {
            self.dropped as f64 / self.generated as f64
        }
    }

    pub fn mean_latency_ms(&self) -> f64 {
        if self.delivered == 0 {
            0.0
        } else {
            self.latency_sum_ms / self.delivered as f64
        }
    }
}

struct Pending {
    born: usize,
    attempts: u32,
}

pub fn run_contention(cfg: &ContentionConfig) -> Result<Vec<SenderStats>> {
    cfg.timing.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let n = cfg.priorities.len();
    let mut queues: Vec<VecDeque<Pending>> = (0..n).map(|_| VecDeque::new()).collect();
    let mut stats: Vec<SenderStats> = cfg.priorities.iter().map(|&p| SenderStats { priority: p, ..Default::default() }).collect();
    let tick = cfg.timing.priority_tick_us;

    for frame in 0..cfg.frames {
        for (q, s) in queues.iter_mut().zip(stats.iter_mut()) {
            if rng.gen_bool(cfg.load) {
                q.push_back(Pending { born: frame, attempts: 0 });
                s.generated += 1;
            }
        }
        let active: Vec<usize> = (0..n).filter(|&i| !queues[i].is_empty()).collect();
        if active.is_empty() {
            continue;
        }
        let contenders: Vec<ContendingTx> = active
            .iter()
            .map(|&i| ContendingTx { sender: i, receiver: n, priority: cfg.priorities[i], tag: i })
            .collect();
        let draws: Vec<bool> = active
            .iter()
            .map(|&i| {
                let next_below = active
                    .iter()
                    .map(|&j| cfg.priorities[j])
                    .filter(|&p| p > cfg.priorities[i])
                    .min()
                    .map(|p| p - cfg.priorities[i]);
                let per = next_below.map_or(0.0, |d| cfg.per.per(tick, d));
                rng.gen_bool(cfg.link_pdr) && !rng.gen_bool(per)
            })
            .collect();
        let outcomes = arbitrate_slot(&contenders, &cfg.timing, &draws)?;
        for (&i, o) in active.iter().zip(outcomes) {
            match o {
                Outcome::Delivered => {
                    let offset_ms = super::adjusted_tx_offset(&cfg.timing, cfg.priorities[i])? as f64 / 1000.0;
                    let p = queues[i].pop_front().expect("head present");
                    stats[i].delivered += 1;
                    stats[i].latency_sum_ms += (frame - p.born) as f64 * cfg.slotframe_ms + offset_ms;
                }
                Outcome::Deferred if !cfg.deferral_consumes_retry => {}
                _ => {
                    let head = queues[i].front_mut().expect("active sender has a packet");
                    head.attempts += 1;
                    if head.attempts > cfg.max_retries {
                        queues[i].pop_front();
                        stats[i].dropped += 1;
                    }
                }
            }
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_priority_never_drops_and_latency_orders() {
        let cfg = ContentionConfig { frames: 5_000, load: 0.4, ..Default::default() };
        let s = run_contention(&cfg).unwrap();
        assert_eq!(s[0].dropped, 0);
        assert!(s[0].mean_latency_ms() < s[1].mean_latency_ms());
        assert!(s[1].mean_latency_ms() < s[2].mean_latency_ms());
    }

    #[test]
    fn short_tick_hurts_the_winner() {
        let cfg = ContentionConfig {
            timing: SlotTiming::with_tick(30).unwrap(),
            frames: 5_000,
            load: 0.9,
            max_retries: 0,
            ..Default::default()
        };
        let s = run_contention(&cfg).unwrap();
        assert!(s[0].dropped > 0);
    }
}
