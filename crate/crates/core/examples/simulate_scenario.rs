//! Runs a scenario file slot by slot and prints the trace around the disturbance.
//!
//! `cargo run --example simulate_scenario -- path/to/scenario.toml`

use rtwn::config::Scenario;
use rtwn::sim::{run, Metrics, TraceKind};

fn main() -> rtwn::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/testbed.toml").into());
    let cfg = Scenario::load(path.as_ref())?.to_sim_config()?;
    let out = run(&cfg)?;
    let from = out.event.as_ref().map_or(0, |e| e.detect);
    let to = out.dynamic.as_ref().map_or(from + 30, |d| d.end);
    for r in out.trace.records.iter().filter(|r| r.slot >= from && r.slot < to && r.kind != TraceKind::Sched) {
        println!("{r}");
    }
    for (i, s) in out.metrics.per_task.iter().enumerate() {
        println!("task {i}: released {} delivered {} missed {} dropped {}", s.released, s.delivered, s.missed, s.dropped);
    }
    Metrics::write_csv(std::slice::from_ref(&out.metrics), std::io::stdout()).expect("stdout");
    Ok(())
}
