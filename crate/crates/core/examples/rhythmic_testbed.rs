//! Disturbance handling on the seven-node testbed at both dropping levels.

use rtwn::config::Scenario;
use rtwn::dropping::DynSlot;
use rtwn::sim::{run, Framework};

fn main() -> rtwn::Result<()> {
    let scenario = Scenario::parse(include_str!("scenarios/testbed.toml"))?;
    for framework in [Framework::DistributedPacket, Framework::DistributedTransmission] {
        let mut cfg = scenario.to_sim_config()?;
        cfg.framework = framework;
        let out = run(&cfg)?;
        let d = out.dynamic.as_ref().expect("testbed admits a dynamic schedule");
        let e = &d.event;
        println!("== {framework}");
        println!("detect {} enter {} exit {} end point {}", e.detect, e.enter, e.exit, d.end);
        println!("extra demand per rhythmic packet {:?}", d.demand.v);
        for (i, p) in d.sets.rhythmic.iter().enumerate() {
            println!("  r{i} [{}, {}) slots {:?}", p.release, p.deadline, d.rhythmic_slots(i));
        }
        for (p, delta) in &d.decision.degradations {
            println!("  task {} packet {} loses {:.4}", p.task, p.packet, delta);
        }
        let row: String = (e.enter..d.end)
            .map(|t| match d.at(t) {
                DynSlot::Rhythmic { .. } => 'R',
                DynSlot::Keep if d.freed_slots().contains(&t) => 'x',
                DynSlot::Keep => '.',
            })
            .collect();
        println!("  {row}");
        println!("  dr {:.4} drt {:?} dhl {:?}", out.metrics.dr.unwrap_or(0.0), out.metrics.drt, out.metrics.dhl);
    }
    Ok(())
}
