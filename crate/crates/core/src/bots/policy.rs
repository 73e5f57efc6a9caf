use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::puppet::BotSpec;
use crate::engine::rng::stream;
use crate::engine::{Env, Stream};

/// Something that picks an action for one player slot each step.
pub trait Policy: Send + fmt::Debug {
    fn name(&self) -> &str;

    /// Action for `player` given the episode as it stands.
    fn act(&mut self, env: &Env, player: usize) -> usize;
}

/// Uniform over the slot's action set.
#[derive(Debug)]
pub struct RandomPolicy {
    rng: Stream,
}

impl RandomPolicy {
    pub fn new(rng: Stream) -> Self {
        RandomPolicy { rng }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn act(&mut self, env: &Env, player: usize) -> usize {
        self.rng.gen_range(0..env.action_set(player).len())
    }
}

/// Builds fresh policies for an episode. Implementations must be
/// deterministic in `(slot, seed)`.
pub trait PolicyFactory: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn build(&self, slot: usize, seed: u64) -> Box<dyn Policy>;
}

/// Stream label a policy in `slot` draws from.
pub fn policy_stream(seed: u64, slot: usize) -> Stream {
    stream(seed, &format!("policy/{slot}"))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RandomFactory;

impl PolicyFactory for RandomFactory {
    fn name(&self) -> &str {
        "random"
    }

    fn build(&self, slot: usize, seed: u64) -> Box<dyn Policy> {
        Box::new(RandomPolicy::new(policy_stream(seed, slot)))
    }
}

/// Scripted bots as a policy source.
#[derive(Debug, Clone)]
pub struct BotFactory(pub Arc<BotSpec>);

impl PolicyFactory for BotFactory {
    fn name(&self) -> &str {
        &self.0.name
    }

    fn build(&self, slot: usize, seed: u64) -> Box<dyn Policy> {
        Box::new(self.0.controller(slot, policy_stream(seed, slot)))
    }
}
