use super::Framework;
use crate::dropping::DropDecision;

pub const CSV_HEADER: [&str; 11] =
    ["framework", "seed", "U*", "R", "alpha", "drt", "dhl", "success", "dr", "dropped_packets", "dropped_transmissions"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaskStats {
    pub released: u64,
    pub delivered: u64,
    pub missed: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub framework: Framework,
    pub seed: u64,
    pub utilization: f64,
    pub steps: usize,
    pub alpha: usize,
    pub drt: Option<usize>,
    pub dhl: Option<usize>,
    pub success: bool,
    pub dr: Option<f64>,
    pub dropped_packets: usize,
    pub dropped_transmissions: usize,
    pub per_task: Vec<TaskStats>,
}

impl Metrics {
    pub fn csv_row(&self) -> [String; 11] {
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.framework.to_string(),
            self.seed.to_string(),
            format!("{:.6}", self.utilization),
            self.steps.to_string(),
            self.alpha.to_string(),
            opt(self.drt),
            opt(self.dhl),
            self.success.to_string(),
            self.dr.map(|v| format!("{:.6}", v + 0.0)).unwrap_or_default(),
            self.dropped_packets.to_string(),
            self.dropped_transmissions.to_string(),
        ]
    }

    pub fn write_csv<W: std::io::Write>(rows: &[Metrics], out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for m in rows {
            w.write_record(m.csv_row())?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean degradation over the periodic packets active in rhythmic mode; zero when none are.
pub fn degradation_rate(decision: &DropDecision, active_packets: usize) -> f64 {
    if active_packets == 0 {
        0.0
    } else {
        decision.total_degradation / active_packets as f64
    }
}

/// Fraction of runs that responded within `alpha` slots with a feasible schedule.
pub fn success_ratio(runs: &[Metrics], alpha: usize) -> f64 {
    if runs.is_empty() {
        return 0.0;
    }
    let ok = runs.iter().filter(|m| m.success && m.drt.is_some_and(|d| d <= alpha)).count();
    ok as f64 / runs.len() as f64
}
