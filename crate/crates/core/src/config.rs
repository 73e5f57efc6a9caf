//! Substrate configuration files.
//!
//! A substrate file is TOML with a fixed header and a family-specific
//! `[params]` table:
//!
//! ```toml
//! id = "coins"
//! family = "coins"
//! map = "coins"
//! roles = ["default"]
//! default_roles = ["default", "default"]
//! min_players = 2
//! max_players = 2
//!
//! [termination]
//! min_steps = 300
//! end_probability = 0.0005
//!
//! [params]
//! collect_reward = 1.0
//! mismatch_penalty = -2.0
//! initial_density = 0.1
//! spawn_prob = 0.0005
//! ```
//!
//! An optional `[palette]` table overrides individual sprite colours.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::engine::{ActionSet, Env, EpisodeSetup, MapLayout, Palette, Termination};
use crate::error::{Error, Result};
use crate::substrates::{Family, Params};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    id: String,
    family: Family,
    map: String,
    roles: Vec<String>,
    default_roles: Vec<String>,
    min_players: usize,
    max_players: usize,
    termination: Termination,
    #[serde(default)]
    palette: Option<toml::Table>,
    #[serde(default)]
    description: String,
    params: toml::Table,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubstrateConfig {
    pub id: String,
    pub family: Family,
    pub map: String,
    pub roles: Vec<String>,
    pub default_roles: Vec<String>,
    pub min_players: usize,
    pub max_players: usize,
    pub termination: Termination,
    pub description: String,
    pub params: Params,
    #[serde(skip)]
    pub palette: Palette,
    #[serde(skip)]
    raw: toml::Table,
}

impl SubstrateConfig {
    pub fn parse(source: &str, text: &str) -> Result<Self> {
        let raw: toml::Table =
            toml::from_str(text).map_err(|e| Error::config(format!("{source}: {e}")))?;
        Self::from_table(source, raw)
    }

    fn from_table(source: &str, raw: toml::Table) -> Result<Self> {
        let h = Header::deserialize(toml::Value::Table(raw.clone()))
            .map_err(|e| Error::config(format!("{source}: {e}")))?;
        let params = Params::parse(&h.id, h.family, h.params)?;
        let palette = match h.palette {
            Some(t) => Palette::deserialize(toml::Value::Table(t))
                .map_err(|e| Error::config(format!("{source} palette: {e}")))?,
            None => Palette::default(),
        };
        let cfg = SubstrateConfig {
            id: h.id,
            family: h.family,
            map: h.map,
            roles: h.roles,
            default_roles: h.default_roles,
            min_players: h.min_players,
            max_players: h.max_players,
            termination: h.termination,
            description: h.description,
            params,
            palette,
            raw,
        };
        cfg.validate_roles(&cfg.default_roles)?;
        Ok(cfg)
    }

    /// A copy with `overrides` deep-merged over the original file.
    pub fn with_overrides(&self, overrides: &toml::Table) -> Result<Self> {
        let mut raw = self.raw.clone();
        merge(&mut raw, overrides);
        Self::from_table(&format!("{} (overridden)", self.id), raw)
    }

    pub fn validate_roles(&self, roles: &[String]) -> Result<()> {
        let n = roles.len();
        if n < self.min_players || n > self.max_players {
            return Err(Error::config(format!(
                "{}: {n} players requested, supported range is {}..={}",
                self.id, self.min_players, self.max_players
            )));
        }
        if let Some(bad) = roles.iter().find(|r| !self.roles.contains(r)) {
            return Err(Error::config(format!(
                "{}: unknown role `{bad}` (roles: {})",
                self.id,
                self.roles.join(", ")
            )));
        }
        Ok(())
    }
}

/// Recursive table merge; non-table values in `over` replace `base`.
pub fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// A substrate factory: a parsed config bound to its map.
#[derive(Debug, Clone)]
pub struct Substrate {
    pub config: SubstrateConfig,
    setup: EpisodeSetup,
}

impl Substrate {
    pub fn new(config: SubstrateConfig, layout: Arc<MapLayout>) -> Self {
        let setup = EpisodeSetup {
            substrate: config.id.clone(),
            layout,
            termination: config.termination,
            palette: Arc::new(config.palette.clone()),
        };
        Substrate { config, setup }
    }

    pub fn id(&self) -> &str {
        &self.config.id
    }

    pub fn layout(&self) -> &MapLayout {
        &self.setup.layout
    }

    pub fn default_roles(&self) -> &[String] {
        &self.config.default_roles
    }

    pub fn action_set(&self, role: &str) -> ActionSet {
        self.config.params.rules(&[role.to_string()]).action_set(role)
    }

    /// Starts an episode for `roles` (slot i plays `roles[i]`).
    pub fn reset(&self, roles: &[String], seed: u64) -> Result<Env> {
        self.config.validate_roles(roles)?;
        Env::new(&self.setup, self.config.params.rules(roles), roles, seed)
    }

    /// Starts an episode with the default role configuration.
    pub fn reset_default(&self, seed: u64) -> Result<Env> {
        self.reset(&self.config.default_roles.clone(), seed)
    }
}
