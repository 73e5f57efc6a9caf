//! Deterministic multi-agent gridworld substrates, scripted background bots
//! and a scenario evaluation harness.

pub mod bots;
pub mod config;
pub mod engine;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod registry;
pub mod substrates;

pub use config::{Substrate, SubstrateConfig};
pub use error::{Error, Result};
pub use registry::Registry;

/// Engine version embedded in every output artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/substrates.md")]
    mod substrates {}
    #[doc = include_str!("../../../book/src/matrix-games.md")]
    mod matrix_games {}
    #[doc = include_str!("../../../book/src/bots.md")]
    mod bots {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/scoring.md")]
    mod scoring {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/ffi.md")]
    mod ffi {}
}
