//! Scenario definitions.
//!
//! A scenario file lists the scenarios of one substrate:
//!
//! ```toml
//! substrate = "clean_up"
//!
//! [[scenario]]
//! name = "SC0"
//! focal = 3
//! bots = ["cleaner", "cleaner", "cleaner", "cleaner"]
//! ```
//!
//! The first `focal` slots are filled from the focal population, the rest
//! by the listed bots in order. `roles` defaults to the substrate's default
//! role configuration. A bot entry may be `{ any = [..] }` to draw one name
//! per episode.

use serde::{Deserialize, Serialize};

use crate::config::SubstrateConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BotSlot {
    Name(String),
    Pool { any: Vec<String> },
}

impl BotSlot {
    pub fn names(&self) -> Vec<&str> {
        match self {
            BotSlot::Name(n) => vec![n.as_str()],
            BotSlot::Pool { any } => any.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    /// Focal players outnumber the background.
    Resident,
    Visitor,
}

/// Resident exactly when the focal count is more than half the slots.
pub fn scenario_mode(focal: usize, players: usize) -> ScenarioMode {
    if focal > players.saturating_sub(focal) {
        ScenarioMode::Resident
    } else {
        ScenarioMode::Visitor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec {
    /// `substrate/name`.
    pub id: String,
    pub substrate: String,
    pub roles: Vec<String>,
    pub focal: usize,
    /// One entry per background slot, slots `focal..roles.len()`.
    pub bots: Vec<BotSlot>,
    pub description: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: String,
    focal: usize,
    #[serde(default)]
    bots: Vec<BotSlot>,
    #[serde(default)]
    roles: Option<Vec<String>>,
    #[serde(default)]
    description: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    substrate: String,
    scenario: Vec<Entry>,
}

impl ScenarioSpec {
    pub fn players(&self) -> usize {
        self.roles.len()
    }

    pub fn mode(&self) -> ScenarioMode {
        scenario_mode(self.focal, self.players())
    }

    pub fn focal_slots(&self) -> std::ops::Range<usize> {
        0..self.focal
    }

    pub fn background_slots(&self) -> std::ops::Range<usize> {
        self.focal..self.players()
    }

    /// Parses a scenario file; `lookup` resolves the substrate config.
    pub fn parse_file(
        source: &str,
        text: &str,
        lookup: impl Fn(&str) -> Result<SubstrateConfig>,
    ) -> Result<Vec<ScenarioSpec>> {
        let f: File = toml::from_str(text).map_err(|e| Error::config(format!("{source}: {e}")))?;
        let cfg = lookup(&f.substrate)?;
        f.scenario
            .into_iter()
            .map(|e| {
                let id = format!("{}/{}", f.substrate, e.name);
                let roles = e.roles.unwrap_or_else(|| cfg.default_roles.clone());
                let spec = ScenarioSpec {
                    id,
                    substrate: f.substrate.clone(),
                    roles,
                    focal: e.focal,
                    bots: e.bots,
                    description: e.description,
                };
                spec.validate(&cfg)?;
                Ok(spec)
            })
            .collect()
    }

    pub fn validate(&self, cfg: &SubstrateConfig) -> Result<()> {
        cfg.validate_roles(&self.roles).map_err(|e| e.context(&self.id))?;
        if self.focal == 0 || self.focal > self.players() {
            return Err(Error::config(format!(
                "{}: focal count {} outside 1..={}",
                self.id,
                self.focal,
                self.players()
            )));
        }
        if self.bots.len() != self.players() - self.focal {
            return Err(Error::config(format!(
                "{}: {} background slots but {} bots listed",
                self.id,
                self.players() - self.focal,
                self.bots.len()
            )));
        }
        if self.bots.iter().any(|b| b.names().is_empty()) {
            return Err(Error::config(format!("{}: empty bot pool", self.id)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outnumbering_rule() {
        assert_eq!(scenario_mode(3, 7), ScenarioMode::Visitor);
        assert_eq!(scenario_mode(4, 7), ScenarioMode::Resident);
        assert_eq!(scenario_mode(1, 2), ScenarioMode::Visitor);
        assert_eq!(scenario_mode(2, 2), ScenarioMode::Resident);
    }
}
