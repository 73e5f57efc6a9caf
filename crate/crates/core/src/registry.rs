//! Named substrates, maps, scenarios and bots.
//!
//! The built-in registry is compiled into the library. [`Registry::load`]
//! layers any directories listed in `MPE_REGISTRY_PATH` (separated like
//! `PATH`) on top; each directory may hold `maps/*.map`,
//! `substrates/*.toml`, `scenarios/*.toml` and `bots/*.toml`. Later entries
//! replace earlier ones with the same id.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use crate::bots::BotSpec;
use crate::config::{Substrate, SubstrateConfig};
use crate::engine::MapLayout;
use crate::error::{Error, Result};
use crate::eval::ScenarioSpec;
use crate::substrates::Family;

mod assets {
    include!(concat!(env!("OUT_DIR"), "/assets.rs"));
}

pub const REGISTRY_PATH_VAR: &str = "MPE_REGISTRY_PATH";

#[derive(Debug, Clone, Default)]
pub struct Registry {
    maps: BTreeMap<String, Arc<MapLayout>>,
    configs: BTreeMap<String, SubstrateConfig>,
    scenarios: BTreeMap<String, ScenarioSpec>,
    bots: BTreeMap<String, BotSpec>,
}

impl Registry {
    /// The compiled-in registry.
    pub fn builtin() -> &'static Registry {
        static REG: OnceLock<Registry> = OnceLock::new();
        REG.get_or_init(|| Registry::embedded().expect("built-in registry assets are valid"))
    }

    fn embedded() -> Result<Registry> {
        let mut reg = Registry::default();
        for (name, text) in assets::MAPS {
            reg.add_map(name, text)?;
        }
        for (name, text) in assets::SUBSTRATES {
            reg.add_substrate(name, text)?;
        }
        for (name, text) in assets::BOTS {
            reg.add_bots(name, text)?;
        }
        for (name, text) in assets::SCENARIOS {
            reg.add_scenarios(name, text)?;
        }
        reg.check()?;
        Ok(reg)
    }

    /// Built-in registry plus the directories in `MPE_REGISTRY_PATH`.
    pub fn load() -> Result<Registry> {
        let mut reg = Registry::builtin().clone();
        if let Some(paths) = std::env::var_os(REGISTRY_PATH_VAR) {
            for dir in std::env::split_paths(&paths) {
                reg.overlay(&dir)?;
            }
        }
        Ok(reg)
    }

    /// Adds every asset found under `dir`.
    pub fn overlay(&mut self, dir: &Path) -> Result<()> {
        if !dir.is_dir() {
            return Err(Error::io(format!("registry directory {} not found", dir.display())));
        }
        let read = |sub: &str, ext: &str| -> Result<Vec<(String, String)>> {
            let d = dir.join(sub);
            if !d.is_dir() {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            let entries = std::fs::read_dir(&d).map_err(|e| Error::io(format!("{}: {e}", d.display())))?;
            for e in entries {
                let p = e.map_err(|e| Error::from(e))?.path();
                if p.extension().is_some_and(|x| x == ext) {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(format!("{}: {e}", p.display())))?;
                    let stem = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    out.push((stem, text));
                }
            }
            out.sort();
            Ok(out)
        };
        for (name, text) in read("maps", "map")? {
            self.add_map(&name, &text)?;
        }
        for (name, text) in read("substrates", "toml")? {
            self.add_substrate(&name, &text)?;
        }
        for (name, text) in read("bots", "toml")? {
            self.add_bots(&name, &text)?;
        }
        for (name, text) in read("scenarios", "toml")? {
            self.add_scenarios(&name, &text)?;
        }
        self.check()
    }

    pub fn add_map(&mut self, name: &str, text: &str) -> Result<()> {
        self.maps.insert(name.to_string(), Arc::new(MapLayout::parse(name, text)?));
        Ok(())
    }

    pub fn add_substrate(&mut self, source: &str, text: &str) -> Result<()> {
        let cfg = SubstrateConfig::parse(source, text)?;
        self.configs.insert(cfg.id.clone(), cfg);
        Ok(())
    }

    /// Deep-merges `overrides` into the config of substrate `id`.
    pub fn override_substrate(&mut self, id: &str, overrides: &toml::Table) -> Result<()> {
        let cfg = self.substrate_config(id)?.with_overrides(overrides)?;
        if cfg.id != id {
            return Err(Error::config(format!("override of `{id}` may not change its id")));
        }
        self.configs.insert(id.to_string(), cfg);
        Ok(())
    }

    pub fn add_bots(&mut self, source: &str, text: &str) -> Result<()> {
        for spec in BotSpec::parse_file(source, text)? {
            self.bots.insert(spec.name.clone(), spec);
        }
        Ok(())
    }

    pub fn add_scenarios(&mut self, source: &str, text: &str) -> Result<()> {
        for s in ScenarioSpec::parse_file(source, text, |id| self.substrate_config(id))? {
            self.scenarios.insert(s.id.clone(), s);
        }
        Ok(())
    }

    /// Cross-reference check: maps exist, bots exist, slot counts fit.
    pub fn check(&self) -> Result<()> {
        for cfg in self.configs.values() {
            if !self.maps.contains_key(&cfg.map) {
                return Err(Error::config(format!("substrate `{}` uses unknown map `{}`", cfg.id, cfg.map)));
            }
        }
        for s in self.scenarios.values() {
            let cfg = self.substrate_config(&s.substrate)?;
            cfg.validate_roles(&s.roles)?;
            for slot in &s.bots {
                for name in slot.names() {
                    self.bot(name)?;
                }
            }
        }
        Ok(())
    }

    pub fn map(&self, name: &str) -> Result<Arc<MapLayout>> {
        self.maps
            .get(name)
            .cloned()
            .ok_or_else(|| Error::registry("map", name, self.maps.keys().map(String::as_str)))
    }

    pub fn substrate_config(&self, id: &str) -> Result<SubstrateConfig> {
        self.configs
            .get(id)
            .cloned()
            .ok_or_else(|| Error::registry("substrate", id, self.configs.keys().map(String::as_str)))
    }

    pub fn substrate(&self, id: &str) -> Result<Substrate> {
        let cfg = self.substrate_config(id)?;
        let layout = self.map(&cfg.map)?;
        Ok(Substrate::new(cfg, layout))
    }

    /// Binds an arbitrary (e.g. overridden) config to its map.
    pub fn bind(&self, cfg: SubstrateConfig) -> Result<Substrate> {
        let layout = self.map(&cfg.map)?;
        Ok(Substrate::new(cfg, layout))
    }

    pub fn substrate_ids(&self) -> Vec<String> {
        self.configs.keys().cloned().collect()
    }

    pub fn matrix_ids(&self) -> Vec<String> {
        self.configs
            .values()
            .filter(|c| c.family == Family::Matrix)
            .map(|c| c.id.clone())
            .collect()
    }

    pub fn scenario(&self, id: &str) -> Result<&ScenarioSpec> {
        self.scenarios
            .get(id)
            .ok_or_else(|| Error::registry("scenario", id, self.scenarios.keys().map(String::as_str)))
    }

    pub fn scenarios(&self) -> impl Iterator<Item = &ScenarioSpec> {
        self.scenarios.values()
    }

    pub fn scenario_ids(&self) -> Vec<String> {
        self.scenarios.keys().cloned().collect()
    }

    /// Expands a selector: a scenario id, or a substrate id meaning all of
    /// its scenarios.
    pub fn select_scenarios(&self, selector: &str) -> Result<Vec<&ScenarioSpec>> {
        if let Some(s) = self.scenarios.get(selector) {
            return Ok(vec![s]);
        }
        let all: Vec<&ScenarioSpec> = self.scenarios.values().filter(|s| s.substrate == selector).collect();
        if all.is_empty() {
            return Err(Error::registry("scenario", selector, self.scenarios.keys().map(String::as_str)));
        }
        Ok(all)
    }

    pub fn bot(&self, name: &str) -> Result<&BotSpec> {
        self.bots
            .get(name)
            .ok_or_else(|| Error::registry("bot", name, self.bots.keys().map(String::as_str)))
    }

    pub fn bot_names(&self) -> Vec<String> {
        self.bots.keys().cloned().collect()
    }
}
