use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{connect, DataplaneError, StageDescriptor, StageKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub rate: u64,
    pub width: usize,
    /// Inactive edges stay bound but carry no data.
    pub active: bool,
}

/// Stages plus the connectors wiring them, in declaration order.
#[derive(Clone, Debug, Default)]
pub struct Topology {
    pub stages: Vec<StageDescriptor>,
    pub edges: Vec<Edge>,
}

impl Topology {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_stage(&mut self, desc: StageDescriptor) -> Result<usize, DataplaneError> {
        if self.stage_index(&desc.name).is_some() {
            return Err(DataplaneError::DuplicateStage(desc.name));
        }
        self.stages.push(desc);
        Ok(self.stages.len() - 1)
    }

    pub fn stage_index(&self, name: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.name == name)
    }

    fn index(&self, name: &str) -> Result<usize, DataplaneError> {
        self.stage_index(name)
            .ok_or_else(|| DataplaneError::UnknownStage(name.to_string()))
    }

    /// Binds a connector from `up` to `down`; returns the edge index.
    pub fn connect(&mut self, up: &str, down: &str, rate: u64, width: usize) -> Result<usize, DataplaneError> {
        let (u, d) = (self.index(up)?, self.index(down)?);
        let outs = self.edges.iter().filter(|e| e.from == u).count();
        if outs >= self.stages[u].out_ports {
            return Err(DataplaneError::PortAlreadyBound { stage: up.to_string() });
        }
        let ins = self.edges.iter().filter(|e| e.to == d).count();
        if ins >= self.stages[d].in_ports {
            return Err(DataplaneError::PortAlreadyBound {
                stage: down.to_string(),
            });
        }
        connect(&self.stages[u], &self.stages[d], rate, width)?;
        self.edges.push(Edge {
            from: u,
            to: d,
            rate,
            width,
            active: true,
        });
        Ok(self.edges.len() - 1)
    }

    pub fn edge_between(&self, up: &str, down: &str) -> Option<usize> {
        let (u, d) = (self.stage_index(up)?, self.stage_index(down)?);
        self.edges.iter().position(|e| e.from == u && e.to == d)
    }

    pub fn active_in(&self, stage: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.active && e.to == stage)
    }

    pub fn active_outs(&self, stage: usize) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].active && self.edges[i].from == stage)
            .collect()
    }

    /// Checks the active subgraph and returns its stages in topological order.
    /// Stages whose edges are all inactive are detached and not checked.
    pub fn validate(&self) -> Result<Vec<usize>, DataplaneError> {
        let n = self.stages.len();
        let mut indeg = vec![0usize; n];
        for e in self.edges.iter().filter(|e| e.active) {
            indeg[e.to] += 1;
        }
        for (i, s) in self.stages.iter().enumerate() {
            let touched = self.edges.iter().any(|e| e.from == i || e.to == i);
            let attached = self.edges.iter().any(|e| e.active && (e.from == i || e.to == i));
            if touched && !attached {
                // switched-off alternative path
                continue;
            }
            let has_in = indeg[i] > 0;
            let has_out = !self.active_outs(i).is_empty();
            let ok = match s.kind {
                StageKind::Source => has_out,
                StageKind::Intermediate => has_in && has_out,
                StageKind::Sink => has_in,
            };
            if !ok {
                return Err(DataplaneError::DanglingPort(s.name.clone()));
            }
            if indeg[i] > 1 {
                return Err(DataplaneError::Config(format!(
                    "stage {} has more than one active input",
                    s.name
                )));
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(i) = ready.pop_first() {
            order.push(i);
            for e in self.edges.iter().filter(|e| e.active && e.from == i) {
                indeg[e.to] -= 1;
                if indeg[e.to] == 0 {
                    ready.insert(e.to);
                }
            }
        }
        if order.len() != n {
            return Err(DataplaneError::CyclicTopology);
        }
        Ok(order)
    }

    /// Builds a topology from a parsed config, creating stages through `build`.
    pub fn from_config(
        cfg: &TopologyConfig,
        build: &dyn Fn(&StageConfig) -> Result<StageDescriptor, String>,
    ) -> Result<Topology, DataplaneError> {
        let mut t = Topology::new();
        for sc in &cfg.stage {
            let mut d = build(sc).map_err(|e| DataplaneError::Config(format!("stage {}: {e}", sc.name)))?;
            d.name = sc.name.clone();
            if let Some(p) = sc.in_ports {
                d.in_ports = p;
            }
            if let Some(p) = sc.out_ports {
                d.out_ports = p;
            }
            t.add_stage(d)?;
        }
        for ec in &cfg.edge {
            let i = t.connect(&ec.from, &ec.to, ec.rate, ec.width)?;
            t.edges[i].active = ec.active;
        }
        t.validate()?;
        Ok(t)
    }
}

/// `[[stage]]` entry of a topology file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub name: String,
    pub op: String,
    #[serde(default)]
    pub in_rate: u64,
    #[serde(default)]
    pub out_rate: u64,
    pub in_ports: Option<usize>,
    pub out_ports: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, toml::Value>,
}

/// `[[edge]]` entry of a topology file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub from: String,
    pub to: String,
    pub rate: u64,
    pub width: usize,
    #[serde(default = "yes")]
    pub active: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyConfig {
    #[serde(default)]
    pub stage: Vec<StageConfig>,
    #[serde(default)]
    pub edge: Vec<EdgeConfig>,
}

impl TopologyConfig {
    pub fn from_toml(text: &str) -> Result<Self, DataplaneError> {
        toml::from_str(text).map_err(|e| DataplaneError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("topology config serializes")
    }

    pub fn names(&self) -> HashMap<&str, &StageConfig> {
        self.stage.iter().map(|s| (s.name.as_str(), s)).collect()
    }
}
