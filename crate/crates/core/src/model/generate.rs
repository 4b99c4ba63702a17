use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::{NetworkModel, NodeId};
use super::task::TaskSpec;
use crate::error::{Error, Result};
use crate::static_scheduler::allocate_retry_vector;

pub const MIN_HOPS: usize = 2;
pub const MAX_HOPS: usize = 16;
pub const MAX_PERIOD: usize = 500;

/// Sensor -> controller -> actuator routes grouped by hop count.
#[derive(Debug, Clone)]
pub struct PathCatalog {
    by_hops: BTreeMap<usize, Vec<Vec<NodeId>>>,
}

impl PathCatalog {
    pub fn new(net: &NetworkModel) -> Self {
        let c = net.controller();
        let n = net.node_count();
        let to_ctrl: Vec<Option<Vec<NodeId>>> = (0..n)
            .map(|s| if s == c { None } else { net.shortest_path(s, c) })
            .collect();
        let from_ctrl: Vec<Option<Vec<NodeId>>> = (0..n)
            .map(|a| if a == c { None } else { net.shortest_path(c, a) })
            .collect();
        let mut by_hops: BTreeMap<usize, Vec<Vec<NodeId>>> = BTreeMap::new();
        for s in 0..n {
            let Some(up) = &to_ctrl[s] else { continue };
            for a in 0..n {
                if a == s {
                    continue;
                }
                let Some(down) = &from_ctrl[a] else { continue };
                let mut path = up.clone();
                path.extend_from_slice(&down[1..]);
                let hops = path.len() - 1;
                if !(MIN_HOPS..=MAX_HOPS).contains(&hops) {
                    continue;
                }
                let mut seen = path.clone();
                seen.sort_unstable();
                if seen.windows(2).any(|w| w[0] == w[1]) {
                    continue;
                }
                by_hops.entry(hops).or_default().push(path);
            }
        }
        Self { by_hops }
    }

    pub fn hop_counts(&self) -> Vec<usize> {
        self.by_hops.keys().copied().collect()
    }

    pub fn paths(&self, hops: usize) -> &[Vec<NodeId>] {
        self.by_hops.get(&hops).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.by_hops.is_empty()
    }
}

/// Adds random tasks until the slot utilization `sum w+/P` reaches `target`.
///
/// Each task carries its allocated retry vector so `w+` is fixed at generation time.
pub fn generate_taskset(seed: u64, target: f64, net: &NetworkModel, required: f64) -> Result<Vec<TaskSpec>> {
    generate_taskset_with(&PathCatalog::new(net), seed, target, net, required)
}

pub fn generate_taskset_with(
    catalog: &PathCatalog,
    seed: u64,
    target: f64,
    net: &NetworkModel,
    required: f64,
) -> Result<Vec<TaskSpec>> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Generation(format!("target utilization {target} outside [0,1]")));
    }
    if catalog.is_empty() {
        return Err(Error::Generation("network hosts no sensor-controller-actuator path".into()));
    }
    let hop_choices = catalog.hop_counts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tasks = Vec::new();
    let mut util = 0.0;
    let mut attempts = 0usize;
    while util < target {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::Generation("could not reach the target utilization".into()));
        }
        let hops = hop_choices[rng.gen_range(0..hop_choices.len())];
        let candidates = catalog.paths(hops);
        let path = candidates[rng.gen_range(0..candidates.len())].clone();
        let retries = allocate_retry_vector(&net.path_pdrs(&path)?, required)?;
        let w: u32 = retries.iter().sum();
        if w as usize > MAX_PERIOD {
            continue;
        }
        let period = rng.gen_range(hops..=MAX_PERIOD);
        if (w as usize) > period {
            continue;
        }
        util += w as f64 / period as f64;
        let id = tasks.len();
        tasks.push(TaskSpec::new(id, path, period, period).with_retries(retries));
    }
    Ok(tasks)
}

pub fn slot_utilization(tasks: &[TaskSpec], budgets: &[u32]) -> f64 {
    tasks.iter().zip(budgets).map(|(t, &w)| w as f64 / t.period as f64).sum()
}
