//! TOML scenario files.
//!
//! ```toml
//! [network]
//! nodes = ["V0", "V1", "Vc", "V3"]
//! controller = "Vc"
//! links = [{ from = "V0", to = "V1", pdr = 0.95 }]
//!
//! [[tasks]]
//! path = ["V0", "V1", "Vc", "V3"]
//! period = 20
//!
//! [disturbance]
//! task = 0
//! instance = 3
//! periods = [10, 12, 15]
//!
//! [sim]
//! framework = "distributed-transmission"
//! seed = 7
//! ```

use serde::{Deserialize, Serialize};

use crate::dropping::Solver;
use crate::error::{Error, Result};
use crate::mac::{PerModel, SlotTiming};
use crate::rhythmic::full_demand;
use crate::model::{generate_rhythmic_spec, Link, Mode, NetworkModel, RhythmicSpec, TaskSpec};
use crate::sim::{BroadcastModel, DisturbanceSpec, Framework, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub from: String,
    pub to: String,
    pub pdr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub width: usize,
    pub height: usize,
    pub pdr_min: f64,
    pub pdr_max: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<LinkEntry>,
    /// Generated grid instead of explicit nodes and links.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskEntry {
    pub path: Vec<String>,
    pub period: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retries: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub task: usize,
    pub instance: usize,
    #[serde(default)]
    pub periods: Option<Vec<usize>>,
    #[serde(default)]
    pub deadlines: Option<Vec<usize>>,
    /// Generated periods: ratio of the first rhythmic period to the nominal one.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MacSection {
    pub timing: SlotTiming,
    pub per: PerModel,
    pub rhythmic_priority: Option<u32>,
    pub periodic_priority: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub mode: Mode,
    pub required_pdr: f64,
    pub seed: u64,
    pub horizon: Option<usize>,
    /// Largest acceptable response time in nominal periods of the disturbed task.
    pub alpha_periods: usize,
    pub beta: usize,
    pub solver: Solver,
    pub framework: Framework,
    pub lossy: Option<bool>,
    pub broadcast: BroadcastModel,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            mode: Mode::Tbs,
            required_pdr: 0.99,
            seed: 0,
            horizon: None,
            alpha_periods: 1,
            beta: 4,
            solver: Solver::Greedy,
            framework: Framework::DistributedTransmission,
            lossy: None,
            broadcast: BroadcastModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub network: NetworkSection,
    #[serde(default)]
    pub tasks: Vec<TaskEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceSection>,
    #[serde(default)]
    pub mac: MacSection,
    #[serde(default)]
    pub sim: SimSection,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build_network(&self) -> Result<NetworkModel> {
        self.network.build()
    }

    pub fn build_tasks(&self, net: &NetworkModel) -> Result<Vec<TaskSpec>> {
        self.tasks
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let path = t
                    .path
                    .iter()
                    .map(|n| net.node_by_name(n).ok_or_else(|| Error::Config(format!("task {i}: unknown node {n}"))))
                    .collect::<Result<Vec<_>>>()?;
                let mut spec = TaskSpec::new(i, path, t.period, t.deadline.unwrap_or(t.period));
                if let Some(r) = &t.retries {
                    spec = spec.with_retries(r.clone());
                }
                spec.validate(net)?;
                Ok(spec)
            })
            .collect()
    }

    pub fn to_sim_config(&self) -> Result<SimConfig> {
        let net = self.build_network()?;
        let mut tasks = self.build_tasks(&net)?;
        let mut cfg = SimConfig::new(net, vec![]);
        let s = &self.sim;
        cfg.mode = s.mode;
        cfg.required = s.required_pdr;
        cfg.seed = s.seed;
        cfg.horizon = s.horizon;
        cfg.beta = s.beta;
        cfg.solver = s.solver;
        cfg.framework = s.framework;
        cfg.lossy = s.lossy;
        cfg.broadcast = s.broadcast;
        cfg.timing = self.mac.timing;
        cfg.per = self.mac.per.clone();
        if let Some(p) = self.mac.rhythmic_priority {
            cfg.rhythmic_priority = p;
        }
        if let Some(p) = self.mac.periodic_priority {
            cfg.periodic_priority = p;
        }
        if let Some(d) = &self.disturbance {
            let task = tasks.get(d.task).ok_or_else(|| Error::Config(format!("disturbed task {} unknown", d.task)))?;
            let spec = match (&d.periods, d.gamma, d.steps) {
                (Some(p), None, None) => match &d.deadlines {
                    Some(dl) => RhythmicSpec::new(p.clone(), dl.clone())?,
                    None => RhythmicSpec::implicit(p.clone())?,
                },
                (None, Some(g), Some(r)) => {
                    let demand = task.retries.as_ref().map_or(task.hops(), |v| full_demand(v, true) as usize);
                    generate_rhythmic_spec(task.period, g, r, demand)?
                }
                _ => return Err(Error::Config("disturbance needs either periods or gamma and steps".into())),
            };
            cfg.alpha = s.alpha_periods * task.period;
            tasks[d.task] = task.clone().with_rhythmic(spec.clone());
            cfg.disturbance = Some(DisturbanceSpec { task: d.task, instance: d.instance, spec });
        }
        cfg.tasks = tasks;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl NetworkSection {
    pub fn build(&self) -> Result<NetworkModel> {
        if let Some(g) = &self.grid {
            if !self.nodes.is_empty() || !self.links.is_empty() {
                return Err(Error::Config("give either a grid or explicit nodes and links".into()));
            }
            return NetworkModel::random_grid(g.width, g.height, g.pdr_min, g.pdr_max, g.seed);
        }
        let ctrl_name = self.controller.as_ref().ok_or_else(|| Error::Config("network.controller missing".into()))?;
        let index = |n: &str| {
            self.nodes.iter().position(|x| x == n).ok_or_else(|| Error::Config(format!("unknown node {n}")))
        };
        let controller = index(ctrl_name)?;
        let links = self
            .links
            .iter()
            .map(|l| Ok(Link { from: index(&l.from)?, to: index(&l.to)?, pdr: l.pdr }))
            .collect::<Result<Vec<_>>>()?;
        NetworkModel::new(self.nodes.clone(), controller, links)
    }

    pub fn from_model(net: &NetworkModel) -> Self {
        Self {
            nodes: net.names().to_vec(),
            controller: Some(net.name(net.controller()).to_string()),
            links: net
                .links()
                .iter()
                .map(|l| LinkEntry { from: net.name(l.from).to_string(), to: net.name(l.to).to_string(), pdr: l.pdr })
                .collect(),
            grid: None,
        }
    }
}

impl TaskEntry {
    pub fn from_spec(t: &TaskSpec, net: &NetworkModel) -> Self {
        Self {
            path: t.path.iter().map(|&n| net.name(n).to_string()).collect(),
            period: t.period,
            deadline: (t.deadline != t.period).then_some(t.deadline),
            retries: t.retries.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
[network]
nodes = ["A", "C", "B"]
controller = "C"
links = [{ from = "A", to = "C", pdr = 1.0 }, { from = "C", to = "B", pdr = 1.0 }]

[[tasks]]
path = ["A", "C", "B"]
period = 10

[disturbance]
task = 0
instance = 1
periods = [4, 6]

[sim]
seed = 3
framework = "distributed-packet"
alpha_periods = 2
"#;

    #[test]
    fn parses_small_scenario() {
        let cfg = Scenario::parse(SMALL).unwrap().to_sim_config().unwrap();
        assert_eq!(cfg.tasks.len(), 1);
        assert_eq!(cfg.alpha, 20);
        assert_eq!(cfg.framework, Framework::DistributedPacket);
        assert_eq!(cfg.disturbance.as_ref().unwrap().spec.periods, vec![4, 6]);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Scenario::parse("[network]\nnodes = [\"A\"\n").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_node() {
        let bad = SMALL.replace("path = [\"A\", \"C\", \"B\"]", "path = [\"A\", \"X\", \"B\"]");
        assert!(Scenario::parse(&bad).unwrap().to_sim_config().is_err());
    }
}
