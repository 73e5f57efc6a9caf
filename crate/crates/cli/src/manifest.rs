use std::path::{Path, PathBuf};

use mpe_core::Result;
use serde::Serialize;

use crate::{BenchArgs, Common, EpisodeArgs, EvalArgs, NormalizeArgs, RenderArgs, RunArgs};

/// Everything needed to reproduce an invocation. Echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub engine_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substrate: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub substrates: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scenarios: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub policies: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub roles: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub focal: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<Config>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub path: PathBuf,
    pub overrides: toml::Table,
}

impl Manifest {
    fn new(command: &'static str) -> Self {
        Manifest {
            command,
            engine_version: mpe_core::VERSION,
            substrate: None,
            substrates: Vec::new(),
            scenarios: Vec::new(),
            seeds: Vec::new(),
            episodes: None,
            steps: None,
            policies: Vec::new(),
            roles: Vec::new(),
            focal: Vec::new(),
            max_steps: None,
            inputs: Vec::new(),
            out: None,
            config: None,
        }
    }

    fn with_config(mut self, common: &Common) -> Result<Self> {
        if let Some(path) = &common.config {
            self.config = Some(Config { path: path.clone(), overrides: crate::read_config(path)? });
        }
        Ok(self)
    }

    fn episode(command: &'static str, a: &EpisodeArgs, out: Option<&Path>) -> Result<Self> {
        let mut m = Manifest::new(command).with_config(&a.common)?;
        m.substrate = a.target.clone().or_else(|| a.substrate.clone());
        m.scenarios = a.scenario.iter().cloned().collect();
        m.seeds = vec![a.seed];
        m.policies = a.policies.clone();
        m.roles = a.roles.clone();
        if a.scenario.is_some() {
            m.focal = a.focal.clone();
        }
        m.max_steps = a.max_steps;
        m.out = out.map(Path::to_path_buf);
        Ok(m)
    }

    pub fn run(a: &RunArgs) -> Result<Self> {
        Self::episode("run", &a.episode, a.out.as_deref())
    }

    pub fn render(a: &RenderArgs) -> Result<Self> {
        Self::episode("render", &a.episode, Some(&a.out))
    }

    pub fn eval(a: &EvalArgs) -> Result<Self> {
        let mut m = Manifest::new("eval").with_config(&a.common)?;
        m.scenarios = a.scenario.clone();
        m.seeds = vec![a.seed];
        m.episodes = Some(a.episodes);
        m.focal = a.focal.clone();
        m.max_steps = a.max_steps;
        m.out = Some(a.out.clone());
        Ok(m)
    }

    pub fn normalize(a: &NormalizeArgs) -> Self {
        let mut m = Manifest::new("normalize");
        m.inputs = a.inputs.clone();
        m.out = a.out.clone();
        m
    }

    pub fn bench(a: &BenchArgs) -> Result<Self> {
        let mut m = Manifest::new("bench").with_config(&a.common)?;
        m.substrates = a.substrate.clone();
        m.seeds = vec![a.seed];
        m.steps = Some(a.steps);
        m.out = a.out.clone();
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    /// Leading comment line for CSV outputs.
    pub fn csv_header(&self) -> String {
        format!("# mpe {} manifest {}\n", mpe_core::VERSION, self.to_json())
    }
}
