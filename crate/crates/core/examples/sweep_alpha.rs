//! Success ratio against the response-time bound for local handling and the broadcast baseline.

use rtwn::sim::experiment::{run_sweep, ExperimentSpec, TrialParams};
use rtwn::sim::Framework;

fn main() -> rtwn::Result<()> {
    let spec = ExperimentSpec {
        alphas: (1..=6).collect(),
        frameworks: vec![Framework::DistributedTransmission, Framework::BroadcastBaseline],
        trials: 50,
        base: TrialParams { util: 0.5, ..TrialParams::default() },
        ..ExperimentSpec::default()
    };
    for p in run_sweep(&spec)? {
        println!("{:<26} alpha={}P0 sr={:.2} mean_dr={}", p.params.framework, p.params.alpha_periods, p.sr, p.mean_dr.map_or("-".into(), |d| format!("{d:.4}")));
    }
    Ok(())
}
