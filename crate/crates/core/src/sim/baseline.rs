use super::{BroadcastModel, SimConfig};
use crate::error::{Error, Result};
use crate::model::{Mode, NetworkModel};
use crate::static_scheduler::StaticScheduleResult;

/// Slots a controller broadcast needs to reach every node.
pub fn broadcast_depth(net: &NetworkModel) -> usize {
    net.bfs_from(net.controller()).iter().flatten().map(|x| x.0).max().unwrap_or(0)
}

/// Response time when the disturbance must reach the controller and come back in a
/// periodic broadcast: delivery at the controller, wait for the next broadcast slot,
/// flood for `depth` slots, then start at the next nominal release of the disturbed task.
pub fn baseline_drt(cfg: &SimConfig, st: &StaticScheduleResult) -> Result<usize> {
    let d = cfg.disturbance.as_ref().ok_or_else(|| Error::Config("baseline needs a disturbance".into()))?;
    let task = &cfg.tasks[d.task];
    let p0 = task.period;
    let detect = task.release(d.instance);
    let ctrl_pos = task
        .path
        .iter()
        .position(|&n| n == cfg.network.controller())
        .ok_or_else(|| Error::Task { task: task.id, reason: "path misses the controller".into() })?;
    let hop_in = ctrl_pos - 1;
    let slots = st.packet_slots(d.task, d.instance);
    let at_controller = match st.schedule.mode {
        Mode::Tbs => slots.iter().copied().find(|&t| st.schedule.at(t).and_then(|a| a.hop) == Some(hop_in)),
        Mode::Pbs => slots.get(hop_in).copied(),
    }
    .ok_or(Error::StaticInfeasible { task: d.task, packet: d.instance })?
        + 1;
    Ok(drt_from(detect, at_controller, p0, &cfg.broadcast, broadcast_depth(&cfg.network)))
}

pub(crate) fn drt_from(detect: usize, at_controller: usize, p0: usize, model: &BroadcastModel, radius: usize) -> usize {
    let pb = model.period.unwrap_or(2 * p0).max(1);
    let depth = model.depth.unwrap_or(radius);
    let tb = if at_controller <= model.offset {
        model.offset
    } else {
        model.offset + (at_controller - model.offset).div_ceil(pb) * pb
    };
    let reach = tb + depth;
    let start = reach.div_ceil(p0) * p0;
    start.max(detect + p0) - detect
}
