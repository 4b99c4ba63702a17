//! Priority-offset MAC: start-of-frame offsets encode priority and later starters defer.

pub mod contention;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NodeId;

/// Width of the offset range available for priority encoding.
pub const PRIORITY_WINDOW_US: u32 = 800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlotTiming {
    pub slot_duration_us: u32,
    pub ext_slot_duration_us: u32,
    pub tx_offset_us: u32,
    pub tx_ack_delay_us: u32,
    pub long_gt_us: u32,
    pub ext_long_gt_us: u32,
    pub short_gt_us: u32,
    pub priority_tick_us: u32,
}

impl Default for SlotTiming {
    fn default() -> Self {
        Self {
            slot_duration_us: 10_000,
            ext_slot_duration_us: 10_800,
            tx_offset_us: 2_120,
            tx_ack_delay_us: 1_000,
            long_gt_us: 2_200,
            ext_long_gt_us: 3_000,
            short_gt_us: 1_000,
            priority_tick_us: 400,
        }
    }
}

impl SlotTiming {
    pub fn with_tick(tick: u32) -> Result<Self> {
        let t = Self { priority_tick_us: tick, ..Self::default() };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.priority_tick_us == 0 {
            return Err(Error::Config("priority tick must be positive".into()));
        }
        let last = priority_levels(self) - 1;
        let offset = self.tx_offset_us + last * self.priority_tick_us;
        if offset >= self.ext_slot_duration_us {
            return Err(Error::Config(format!("offset {offset} us does not fit the extended slot")));
        }
        Ok(())
    }
}

pub fn priority_levels(timing: &SlotTiming) -> u32 {
    PRIORITY_WINDOW_US / timing.priority_tick_us + 1
}

pub fn adjusted_tx_offset(timing: &SlotTiming, priority: u32) -> Result<u32> {
    let capacity = priority_levels(timing);
    if priority >= capacity {
        return Err(Error::PriorityRange { level: priority, capacity });
    }
    Ok(timing.tx_offset_us + priority * timing.priority_tick_us)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContendingTx {
    pub sender: NodeId,
    pub receiver: NodeId,
    /// 0 is the highest level.
    pub priority: u32,
    /// Caller-defined reference to the payload, e.g. a packet index.
    pub tag: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Delivered,
    Lost,
    Deferred,
    Collided,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Delivered => "delivered",
            Outcome::Lost => "lost",
            Outcome::Deferred => "deferred",
            Outcome::Collided => "collided",
        }
    }
}

/// Resolves one slot. The earliest offset wins; everyone later hears it and defers. Equal
/// top offsets cannot hear each other and all collide.
pub fn arbitrate_slot(contenders: &[ContendingTx], timing: &SlotTiming, link_success: &[bool]) -> Result<Vec<Outcome>> {
    if contenders.len() != link_success.len() {
        return Err(Error::Contract("one link draw per contender".into()));
    }
    let capacity = priority_levels(timing);
    if let Some(c) = contenders.iter().find(|c| c.priority >= capacity) {
        return Err(Error::PriorityRange { level: c.priority, capacity });
    }
    let Some(top) = contenders.iter().map(|c| c.priority).min() else { return Ok(vec![]) };
    let tied = contenders.iter().filter(|c| c.priority == top).count() > 1;
    Ok(contenders
        .iter()
        .zip(link_success)
        .map(|(c, &ok)| match (c.priority == top, tied, ok) {
            (false, _, _) => Outcome::Deferred,
            (true, true, _) => Outcome::Collided,
            (true, false, true) => Outcome::Delivered,
            (true, false, false) => Outcome::Lost,
        })
        .collect())
}

/// Packet error rate of the winner against a contender `distance` levels below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerModel {
    /// Ticks at or above this never disturb the winner.
    pub safe_tick_us: u32,
    /// PER for distance 1, 2, ... below the safe tick; the last entry covers larger distances.
    pub short_tick_per: Vec<f64>,
}

impl Default for PerModel {
    fn default() -> Self {
        Self { safe_tick_us: 60, short_tick_per: vec![0.10, 0.05] }
    }
}

impl PerModel {
    pub fn per(&self, tick: u32, distance: u32) -> f64 {
        if tick >= self.safe_tick_us || distance == 0 || self.short_tick_per.is_empty() {
            return 0.0;
        }
        let i = (distance as usize - 1).min(self.short_tick_per.len() - 1);
        self.short_tick_per[i]
    }
}

pub fn per_model(tick: u32, distance: u32) -> f64 {
    PerModel::default().per(tick, distance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(priority: u32) -> ContendingTx {
        ContendingTx { sender: priority as usize, receiver: 9, priority, tag: 0 }
    }

    #[test]
    fn offsets() {
        let t = SlotTiming::default();
        assert_eq!(adjusted_tx_offset(&t, 0).unwrap(), 2120);
        assert_eq!(adjusted_tx_offset(&t, 1).unwrap(), 2520);
        let t100 = SlotTiming::with_tick(100).unwrap();
        assert_eq!(adjusted_tx_offset(&t100, 3).unwrap(), 2420);
        assert!(matches!(adjusted_tx_offset(&t, 3), Err(Error::PriorityRange { level: 3, capacity: 3 })));
    }

    #[test]
    fn level_counts() {
        assert_eq!(priority_levels(&SlotTiming::default()), 3);
        assert_eq!(priority_levels(&SlotTiming::with_tick(60).unwrap()), 14);
        assert_eq!(priority_levels(&SlotTiming::with_tick(800).unwrap()), 2);
    }

    #[test]
    fn arbitration() {
        let t = SlotTiming::with_tick(100).unwrap();
        assert_eq!(arbitrate_slot(&[tx(1), tx(3)], &t, &[true, true]).unwrap(), vec![Outcome::Delivered, Outcome::Deferred]);
        assert_eq!(arbitrate_slot(&[tx(0)], &t, &[false]).unwrap(), vec![Outcome::Lost]);
        assert_eq!(
            arbitrate_slot(&[tx(2), tx(2), tx(4)], &t, &[true, true, true]).unwrap(),
            vec![Outcome::Collided, Outcome::Collided, Outcome::Deferred]
        );
        assert!(arbitrate_slot(&[], &t, &[]).unwrap().is_empty());
    }

    #[test]
    fn per_lookup() {
        assert_eq!(per_model(90, 1), 0.0);
        assert_eq!(per_model(30, 1), 0.10);
        assert_eq!(per_model(30, 2), 0.05);
        assert_eq!(per_model(30, 5), 0.05);
    }
}
