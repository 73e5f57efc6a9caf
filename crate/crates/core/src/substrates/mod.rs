//! Substrate families. Each family owns a parameter block (the `[params]`
//! table of its config files) and a [`Rules`] implementation.

pub mod allelopathic;
pub mod boat_race;
pub mod clean_up;
pub mod coins;
pub mod commons;
pub mod coop_mining;
pub mod gift;
pub mod matrix;
pub mod mushrooms;
pub mod territory;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{ActionKind, BeamKind, BeamSpec, Event, EventKind, GridState, Pos, RngStreams, Rules, Stream};
use crate::error::{Error, Result};
use crate::matrix::MatrixGameConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Commons,
    CleanUp,
    Allelopathic,
    Mushrooms,
    Coins,
    BoatRace,
    CoopMining,
    Gift,
    Territory,
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Commons(commons::CommonsParams),
    CleanUp(clean_up::CleanUpParams),
    Allelopathic(allelopathic::AllelopathicParams),
    Mushrooms(mushrooms::MushroomParams),
    Coins(coins::CoinParams),
    BoatRace(boat_race::BoatParams),
    CoopMining(coop_mining::MiningParams),
    Gift(gift::GiftParams),
    Territory(territory::TerritoryParams),
    Matrix(MatrixGameConfig),
}

fn decode<T: DeserializeOwned>(id: &str, table: toml::Table) -> Result<T> {
    T::deserialize(toml::Value::Table(table))
        .map_err(|e| Error::config(format!("substrate `{id}` params: {e}")))
}

impl Params {
    pub fn parse(id: &str, family: Family, table: toml::Table) -> Result<Self> {
        Ok(match family {
            Family::Commons => Params::Commons(decode(id, table)?),
            Family::CleanUp => Params::CleanUp(decode(id, table)?),
            Family::Allelopathic => Params::Allelopathic(decode(id, table)?),
            Family::Mushrooms => Params::Mushrooms(decode(id, table)?),
            Family::Coins => Params::Coins(decode(id, table)?),
            Family::BoatRace => Params::BoatRace(decode(id, table)?),
            Family::CoopMining => Params::CoopMining(decode(id, table)?),
            Family::Gift => Params::Gift(decode(id, table)?),
            Family::Territory => Params::Territory(decode(id, table)?),
            Family::Matrix => {
                let m: MatrixGameConfig = decode(id, table)?;
                m.validate()?;
                Params::Matrix(m)
            }
        })
    }

    pub fn rules(&self, roles: &[String]) -> Box<dyn Rules> {
        match self {
            Params::Commons(p) => Box::new(commons::CommonsRules::new(p.clone())),
            Params::CleanUp(p) => Box::new(clean_up::CleanUpRules::new(p.clone())),
            Params::Allelopathic(p) => Box::new(allelopathic::AllelopathicRules::new(p.clone(), roles)),
            Params::Mushrooms(p) => Box::new(mushrooms::MushroomRules::new(p.clone())),
            Params::Coins(p) => Box::new(coins::CoinRules::new(p.clone())),
            Params::BoatRace(p) => Box::new(boat_race::BoatRules::new(p.clone())),
            Params::CoopMining(p) => Box::new(coop_mining::MiningRules::new(p.clone())),
            Params::Gift(p) => Box::new(gift::GiftRules::new(p.clone())),
            Params::Territory(p) => Box::new(territory::TerritoryRules::new(p.clone())),
            Params::Matrix(p) => Box::new(matrix::MatrixRules::new(p.clone())),
        }
    }
}

/// Geometry and effect of the ordinary zapping beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZapParams {
    pub length: u8,
    pub cooldown: u32,
    /// Steps a zapped player spends off the map.
    pub removal: u64,
}

impl ZapParams {
    pub fn action(&self) -> (&'static str, ActionKind) {
        ("zap", ActionKind::Beam(BeamSpec::zap(self.length, self.cooldown)))
    }
}

/// Emits the hit and removes the target for `removal` steps.
pub(crate) fn zap_remove(st: &mut GridState, actor: usize, target: usize, removal: u64) {
    st.emit(Event::new(EventKind::ZapHit, actor).on(target));
    st.remove_for(target, removal);
    st.emit(Event::new(EventKind::Removed, actor).on(target));
}

/// 1.0 when the beam in `kind`'s slot can fire on the current step.
pub(crate) fn ready(st: &GridState, player: usize, kind: BeamKind) -> f64 {
    let a = &st.avatars[player];
    if st.step >= a.beam_ready_at[kind.slot()] {
        1.0
    } else {
        0.0
    }
}

/// Uniformly chosen cell of `sites` holding neither a resource nor an avatar.
pub(crate) fn random_empty(
    st: &mut GridState,
    sites: &[Pos],
    stream: impl FnOnce(&mut RngStreams) -> &mut Stream,
) -> Option<Pos> {
    let empty: Vec<Pos> = sites
        .iter()
        .copied()
        .filter(|p| st.resource(*p).is_none() && st.avatar_at(*p).is_none())
        .collect();
    if empty.is_empty() {
        None
    } else {
        let i = stream(&mut st.rng).gen_range(0..empty.len());
        Some(empty[i])
    }
}
