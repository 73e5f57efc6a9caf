//! Scripted background bots.
//!
//! Every named bot is a [`PuppetController`] running a script from the bot
//! registry (`assets/bots/*.toml`). The reciprocation logic lives in small
//! pure functions in [`machines`] so it can be tested without an episode.

pub mod goals;
pub mod machines;
pub mod nav;
pub mod policy;
pub mod puppet;

use std::sync::Arc;

pub use goals::Goal;
pub use machines::{
    classify_partner_play, cleanup_conditional_step, coins_reciprocator_step, grim_update,
    turn_taker_step, CleanUpGoal, CoinsReciprocator, GrimState, Mode,
};
pub use policy::{BotFactory, Policy, PolicyFactory, RandomFactory, RandomPolicy};
pub use puppet::{BotSpec, PuppetController};

use crate::engine::rng::stream;
use crate::error::Result;
use crate::registry::Registry;

/// Controller for the built-in bot `name` in slot `player`.
pub fn bot_catalog(name: &str, player: usize, seed: u64) -> Result<PuppetController> {
    let spec = Arc::new(Registry::builtin().bot(name)?.clone());
    Ok(spec.controller(player, stream(seed, &format!("bot/{player}"))))
}

/// Resolves a policy name: `random` or any registered bot.
pub fn policy_factory(reg: &Registry, name: &str) -> Result<Arc<dyn PolicyFactory>> {
    if name == "random" {
        return Ok(Arc::new(RandomFactory));
    }
    Ok(Arc::new(BotFactory(Arc::new(reg.bot(name)?.clone()))))
}
