use serde::{Deserialize, Serialize};

use super::network::{NetworkModel, NodeId};
use crate::error::{Error, Result};

pub type TaskId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhythmicSpec {
    pub periods: Vec<usize>,
    pub deadlines: Vec<usize>,
}

impl RhythmicSpec {
    pub fn new(periods: Vec<usize>, deadlines: Vec<usize>) -> Result<Self> {
        let s = Self { periods, deadlines };
        s.validate()?;
        Ok(s)
    }

    /// Deadlines equal to periods.
    pub fn implicit(periods: Vec<usize>) -> Result<Self> {
        let deadlines = periods.clone();
        Self::new(periods, deadlines)
    }

    pub fn validate(&self) -> Result<()> {
        if self.periods.is_empty() {
            return Err(Error::Contract("rhythmic spec needs at least one step".into()));
        }
        if self.periods.len() != self.deadlines.len() {
            return Err(Error::Contract("rhythmic periods and deadlines differ in length".into()));
        }
        if self.periods.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Contract("rhythmic periods must be non-decreasing".into()));
        }
        if self.periods.iter().zip(&self.deadlines).any(|(p, d)| d > p || *d == 0) {
            return Err(Error::Contract("rhythmic deadline must lie in (0, period]".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.periods.len()
    }

    pub fn total(&self) -> usize {
        self.periods.iter().sum()
    }
}

/// `floor(P0 * (gamma + (k-1)(1-gamma)/R))` for k = 1..=R, deadlines equal to periods.
///
/// `gamma` is resolved to six decimals so the floor is taken on exact integers.
pub fn generate_rhythmic_spec(nominal_period: usize, gamma: f64, steps: usize, hops: usize) -> Result<RhythmicSpec> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Contract(format!("gamma {gamma} outside (0,1)")));
    }
    if steps == 0 {
        return Err(Error::Contract("R must be at least 1".into()));
    }
    if nominal_period < hops {
        return Err(Error::Contract(format!("P0 {nominal_period} below H0 {hops}")));
    }
    const SCALE: u128 = 1_000_000;
    let g = (gamma * SCALE as f64).round() as u128;
    let (p0, r) = (nominal_period as u128, steps as u128);
    let mut periods = Vec::with_capacity(steps);
    for k in 0..r {
        let num = p0 * (g * r + k * (SCALE - g));
        let period = (num / (SCALE * r)) as usize;
        if period < hops {
            return Err(Error::InfeasibleRhythmicSpec { step: k as usize + 1, period, hops });
        }
        periods.push(period);
    }
    RhythmicSpec::implicit(periods)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: TaskId,
    pub path: Vec<NodeId>,
    pub period: usize,
    pub deadline: usize,
    /// Explicit per-hop trial counts; allocated from the reliability target when absent.
    pub retries: Option<Vec<u32>>,
    pub rhythmic: Option<RhythmicSpec>,
}

impl TaskSpec {
    pub fn new(id: TaskId, path: Vec<NodeId>, period: usize, deadline: usize) -> Self {
        Self { id, path, period, deadline, retries: None, rhythmic: None }
    }

    pub fn with_retries(mut self, retries: Vec<u32>) -> Self {
        self.retries = Some(retries);
        self
    }

    pub fn with_rhythmic(mut self, spec: RhythmicSpec) -> Self {
        self.rhythmic = Some(spec);
        self
    }

    pub fn hops(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    pub fn sender(&self, hop: usize) -> NodeId {
        self.path[hop]
    }

    pub fn receiver(&self, hop: usize) -> NodeId {
        self.path[hop + 1]
    }

    pub fn involves(&self, hop: usize, node: NodeId) -> bool {
        self.path[hop] == node || self.path[hop + 1] == node
    }

    pub fn release(&self, k: usize) -> usize {
        k * self.period
    }

    pub fn validate(&self, net: &NetworkModel) -> Result<()> {
        let bad = |reason: String| Error::Task { task: self.id, reason };
        if self.hops() < 2 {
            return Err(bad("path needs at least two hops".into()));
        }
        if !self.path.contains(&net.controller()) {
            return Err(bad("path does not pass through the controller".into()));
        }
        if self.path.iter().any(|&n| n >= net.node_count()) {
            return Err(bad("path uses an undeclared node".into()));
        }
        let mut sorted = self.path.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("path revisits a node".into()));
        }
        net.path_pdrs(&self.path)?;
        if self.period == 0 || self.deadline == 0 || self.deadline > self.period {
            return Err(bad(format!("need 0 < D <= P, got D={} P={}", self.deadline, self.period)));
        }
        if let Some(r) = &self.retries {
            if r.len() != self.hops() {
                return Err(bad(format!("{} retry entries for {} hops", r.len(), self.hops())));
            }
            if r.iter().any(|&x| x == 0) {
                return Err(bad("every hop needs at least one slot".into()));
            }
        }
        if let Some(rs) = &self.rhythmic {
            rs.validate()?;
        }
        Ok(())
    }
}

/// One packet of a task, with the outcome filled in by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct PacketInstance {
    pub task: TaskId,
    pub index: usize,
    pub release: usize,
    pub deadline: usize,
    pub finish: Option<usize>,
    pub retry_vector: Vec<u32>,
    pub achieved_pdr: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhythmic_spec_examples() {
        assert_eq!(generate_rhythmic_spec(100, 0.2, 4, 2).unwrap().periods, vec![20, 40, 60, 80]);
        assert_eq!(generate_rhythmic_spec(100, 0.2, 1, 2).unwrap().periods, vec![20]);
    }

    #[test]
    fn rhythmic_spec_too_short() {
        let err = generate_rhythmic_spec(20, 0.2, 4, 5).unwrap_err();
        assert_eq!(err, Error::InfeasibleRhythmicSpec { step: 1, period: 4, hops: 5 });
    }

    #[test]
    fn rhythmic_spec_rejects_decreasing() {
        assert!(RhythmicSpec::implicit(vec![5, 4]).is_err());
        assert!(RhythmicSpec::new(vec![5], vec![6]).is_err());
    }
}
