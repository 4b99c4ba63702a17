use serde::{Deserialize, Serialize};

use super::task::TaskId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Every slot is pinned to a (packet, hop).
    Tbs,
    /// Every slot is pinned to a packet; the hop is chosen at run time.
    Pbs,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Tbs => "tbs",
            Mode::Pbs => "pbs",
        })
    }
}

/// Owner of one slot in the static schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub task: TaskId,
    /// Instance index k of the packet.
    pub packet: usize,
    /// Hop under TBS, `None` under PBS.
    pub hop: Option<usize>,
    /// Zero-based position of this slot among the packet's slots.
    pub nth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub mode: Mode,
    pub slots: Vec<Option<Assignment>>,
}

impl Schedule {
    pub fn idle(mode: Mode, horizon: usize) -> Self {
        Self { mode, slots: vec![None; horizon] }
    }

    pub fn horizon(&self) -> usize {
        self.slots.len()
    }

    pub fn at(&self, t: usize) -> Option<Assignment> {
        self.slots.get(t).copied().flatten()
    }

    pub fn is_idle(&self, t: usize) -> bool {
        self.at(t).is_none()
    }

    /// Slots of `(task, packet)` in ascending order.
    pub fn slots_of(&self, task: TaskId, packet: usize) -> Vec<usize> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(t, a)| match a {
                Some(a) if a.task == task && a.packet == packet => Some(t),
                _ => None,
            })
            .collect()
    }
}
