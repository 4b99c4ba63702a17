//! Random disturbed task sets and parameter sweeps.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{assess, DisturbanceSpec, Framework, Metrics, SimConfig};
use crate::dropping::Solver;
use crate::error::{Error, Result};
use crate::model::{generate_rhythmic_spec, generate_taskset_with, Mode, NetworkModel, PathCatalog};
use crate::rhythmic::full_demand;
use crate::static_scheduler::build_static_schedule_until;

/// Redraws allowed before a trial seed is given up.
pub const MAX_ATTEMPTS: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialParams {
    pub util: f64,
    pub steps: usize,
    pub gamma: f64,
    pub alpha_periods: usize,
    pub beta: usize,
    pub required: f64,
    pub framework: Framework,
    pub mode: Mode,
    pub solver: Solver,
    pub grid_width: usize,
    pub grid_height: usize,
    pub pdr_min: f64,
    pub pdr_max: f64,
    /// Disturbed instance is drawn from `0..max_instance`.
    pub max_instance: usize,
    pub priority_tick_us: u32,
}

impl Default for TrialParams {
    fn default() -> Self {
        Self {
            util: 0.5,
            steps: 4,
            gamma: 0.2,
            alpha_periods: 1,
            beta: 4,
            required: 0.99,
            framework: Framework::DistributedTransmission,
            mode: Mode::Tbs,
            solver: Solver::Greedy,
            grid_width: 9,
            grid_height: 9,
            pdr_min: 0.9,
            pdr_max: 1.0,
            max_instance: 20,
            priority_tick_us: 400,
        }
    }
}

fn mix(seed: u64, attempt: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws a network, a task set, the disturbed task and its rhythmic spec. Draws whose
/// static schedule is infeasible or whose first rhythmic period cannot hold one packet
/// are redrawn from a derived seed.
pub fn build_trial(params: &TrialParams, seed: u64) -> Result<SimConfig> {
    let base = NetworkModel::random_grid(params.grid_width, params.grid_height, params.pdr_min, params.pdr_max, seed)?;
    let catalog = PathCatalog::new(&base);
    for attempt in 0..MAX_ATTEMPTS {
        let s = mix(seed, attempt);
        let mut tasks = generate_taskset_with(&catalog, s, params.util, &base, params.required)?;
        if tasks.is_empty() {
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x5EED);
        let victim = rng.gen_range(0..tasks.len());
        let instance = rng.gen_range(0..params.max_instance.max(1));
        let retries = tasks[victim].retries.clone().expect("generated tasks carry retries");
        let demand = full_demand(&retries, true) as usize;
        let Ok(spec) = generate_rhythmic_spec(tasks[victim].period, params.gamma, params.steps, demand) else { continue };
        tasks[victim] = tasks[victim].clone().with_rhythmic(spec.clone());
        let p0 = tasks[victim].period;
        let mut cfg = SimConfig::new(base.clone(), tasks);
        cfg.mode = params.mode;
        cfg.required = params.required;
        cfg.seed = seed;
        cfg.beta = params.beta;
        cfg.solver = params.solver;
        cfg.framework = params.framework;
        cfg.alpha = params.alpha_periods * p0;
        cfg.timing.priority_tick_us = params.priority_tick_us;
        cfg.disturbance = Some(DisturbanceSpec { task: victim, instance, spec });
        let horizon = cfg.effective_horizon();
        cfg.horizon = Some(horizon);
        let st = build_static_schedule_until(&cfg.tasks, &cfg.network, cfg.mode, cfg.required, horizon)?;
        if st.feasible {
            return Ok(cfg);
        }
    }
    Err(Error::Generation(format!("no usable task set for seed {seed} after {MAX_ATTEMPTS} draws")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub utils: Vec<f64>,
    pub steps: Vec<usize>,
    pub alphas: Vec<usize>,
    pub ticks: Vec<u32>,
    pub frameworks: Vec<Framework>,
    pub trials: usize,
    pub base_seed: u64,
    pub out_dir: Option<String>,
    /// Settings shared by every grid point; the swept fields are overwritten.
    pub base: TrialParams,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            utils: vec![0.5],
            steps: vec![4],
            alphas: (1..=6).collect(),
            ticks: vec![400],
            frameworks: vec![Framework::DistributedTransmission, Framework::BroadcastBaseline],
            trials: 100,
            base_seed: 1,
            out_dir: None,
            base: TrialParams::default(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.utils.is_empty() || self.steps.is_empty() || self.alphas.is_empty() || self.ticks.is_empty() || self.frameworks.is_empty() {
            return Err(Error::Config("every sweep axis needs at least one value".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<TrialParams> {
        let mut out = Vec::new();
        for &framework in &self.frameworks {
            for &util in &self.utils {
                for &steps in &self.steps {
                    for &alpha_periods in &self.alphas {
                        for &priority_tick_us in &self.ticks {
                            out.push(TrialParams { util, steps, alpha_periods, priority_tick_us, framework, ..self.base.clone() });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub params: TrialParams,
    pub trials: usize,
    pub generation_failures: usize,
    pub sr: f64,
    pub mean_dr: Option<f64>,
    pub rows: Vec<Metrics>,
}

pub const SUMMARY_HEADER: [&str; 9] = ["framework", "U*", "R", "alpha", "tick", "trials", "failures", "sr", "mean_dr"];

impl PointSummary {
    pub fn csv_row(&self) -> [String; 9] {
        [
            self.params.framework.to_string(),
            format!("{:.6}", self.params.util),
            self.params.steps.to_string(),
            self.params.alpha_periods.to_string(),
            self.params.priority_tick_us.to_string(),
            self.trials.to_string(),
            self.generation_failures.to_string(),
            format!("{:.6}", self.sr),
            self.mean_dr.map(|v| format!("{:.6}", v + 0.0)).unwrap_or_default(),
        ]
    }
}

/// Runs one grid point. Trial `j` uses seed `base_seed + j` at every point so frameworks
/// and bounds are compared on the same task sets.
pub fn run_point(params: &TrialParams, trials: usize, base_seed: u64) -> PointSummary {
    let results: Vec<Option<Metrics>> = (0..trials as u64)
        .into_par_iter()
        .map(|j| build_trial(params, base_seed + j).and_then(|c| assess(&c)).ok())
        .collect();
    let rows: Vec<Metrics> = results.iter().flatten().cloned().collect();
    let failures = results.len() - rows.len();
    let sr = rows.iter().filter(|m| m.success).count() as f64 / trials as f64;
    let drs: Vec<f64> = rows.iter().filter_map(|m| m.dr).collect();
    let mean_dr = (!drs.is_empty()).then(|| drs.iter().sum::<f64>() / drs.len() as f64);
    PointSummary { params: params.clone(), trials, generation_failures: failures, sr, mean_dr, rows }
}

pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<PointSummary>> {
    spec.validate()?;
    Ok(spec.points().iter().map(|p| run_point(p, spec.trials, spec.base_seed)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trials_are_reproducible() {
        let p = TrialParams::default();
        let a = build_trial(&p, 42).unwrap();
        let b = build_trial(&p, 42).unwrap();
        assert_eq!(a, b);
        let d = a.disturbance.as_ref().unwrap();
        assert_eq!(d.spec.steps(), 4);
        assert_eq!(a.alpha, a.tasks[d.task].period);
    }

    #[test]
    fn grid_points() {
        let s = ExperimentSpec { alphas: vec![1, 2], frameworks: vec![Framework::BroadcastBaseline], ..Default::default() };
        assert_eq!(s.points().len(), 2);
        assert!(ExperimentSpec { trials: 0, ..Default::default() }.validate().is_err());
    }
}
