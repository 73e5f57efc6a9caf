//! Matrix games played through collected inventories.
//!
//! A player's inventory ρ of K resource counts is read as the mixed strategy
//! v = ρ / Σρ. When a row player meets a column player the rewards are the
//! bilinear forms `v_rowᵀ A_row v_col` and `v_rowᵀ A_col v_col`.
//!
//! ```
//! use mpe_core::matrix::{payoff_catalog, resolve_interaction};
//!
//! let pd = payoff_catalog("prisoners_dilemma").unwrap();
//! let (r, c) = resolve_interaction(&[1, 1], &[1, 1], &pd).unwrap();
//! assert_eq!((r, c), (2.25, 2.25));
//! ```

use serde::{Deserialize, Serialize};

use crate::engine::{Stream, Termination};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowAssignment {
    /// Whoever fires the interaction beam is the row player.
    ZapperIsRow,
    /// The row/column side follows the players' roles.
    FixedByRole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixGameConfig {
    pub game: String,
    pub k: usize,
    /// Row-major K×K.
    pub a_row: Vec<f64>,
    /// Row-major K×K. Ignored in favour of `a_rowᵀ` when `symmetric`.
    #[serde(default)]
    pub a_col: Vec<f64>,
    pub symmetric: bool,
    pub row_assignment: RowAssignment,
    /// Role whose holders play the rows under `fixed_by_role`.
    #[serde(default)]
    pub row_role: Option<String>,
    #[serde(default)]
    pub col_role: Option<String>,
    pub removal_duration: u64,
    #[serde(default)]
    pub one_shot: bool,
    /// Steps before a collected resource reappears.
    pub respawn_steps: u64,
    pub initial_inventory: Vec<u32>,
    pub interact_length: u8,
    #[serde(default)]
    pub interact_cooldown: u32,
    /// Names of the pure strategies, index-aligned with resource types.
    pub strategies: Vec<String>,
}

impl MatrixGameConfig {
    pub fn validate(&self) -> Result<()> {
        let k2 = self.k * self.k;
        if self.k == 0 || self.a_row.len() != k2 {
            return Err(Error::config(format!(
                "{}: a_row must hold {k2} entries, has {}",
                self.game,
                self.a_row.len()
            )));
        }
        if !self.symmetric && self.a_col.len() != k2 {
            return Err(Error::config(format!(
                "{}: asymmetric game needs a_col with {k2} entries",
                self.game
            )));
        }
        if self.symmetric && !self.a_col.is_empty() && self.a_col != transpose(&self.a_row, self.k) {
            return Err(Error::config(format!(
                "{}: symmetric game with a_col other than a_rowᵀ",
                self.game
            )));
        }
        if self.initial_inventory.len() != self.k || self.strategies.len() != self.k {
            return Err(Error::config(format!(
                "{}: initial_inventory and strategies need {} entries",
                self.game, self.k
            )));
        }
        if self.initial_inventory.iter().sum::<u32>() == 0 {
            return Err(Error::config(format!("{}: initial inventory is empty", self.game)));
        }
        if self.row_assignment == RowAssignment::FixedByRole
            && (self.row_role.is_none() || self.col_role.is_none())
        {
            return Err(Error::config(format!(
                "{}: fixed_by_role needs row_role and col_role",
                self.game
            )));
        }
        Ok(())
    }

    pub fn row_matrix(&self) -> &[f64] {
        &self.a_row
    }

    /// The column player's matrix, derived for symmetric games.
    pub fn col_matrix(&self) -> Vec<f64> {
        if self.symmetric {
            transpose(&self.a_row, self.k)
        } else {
            self.a_col.clone()
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> (f64, f64) {
        let r = self.a_row[row * self.k + col];
        let c = if self.symmetric {
            self.a_row[col * self.k + row]
        } else {
            self.a_col[row * self.k + col]
        };
        (r, c)
    }
}

fn transpose(m: &[f64], k: usize) -> Vec<f64> {
    (0..k * k).map(|i| m[(i % k) * k + i / k]).collect()
}

/// v_i = ρ_i / Σρ.
pub fn inventory_to_strategy(rho: &[u32]) -> Result<Vec<f64>> {
    let total: u64 = rho.iter().map(|&x| u64::from(x)).sum();
    if total == 0 {
        return Err(Error::contract("empty inventory has no strategy"));
    }
    let t = total as f64;
    Ok(rho.iter().map(|&x| f64::from(x) / t).collect())
}

/// (v_rowᵀ A_row v_col, v_rowᵀ A_col v_col).
pub fn resolve_interaction(rho_row: &[u32], rho_col: &[u32], cfg: &MatrixGameConfig) -> Result<(f64, f64)> {
    if rho_row.len() != cfg.k || rho_col.len() != cfg.k {
        return Err(Error::contract(format!("inventories must have {} entries", cfg.k)));
    }
    let vr = inventory_to_strategy(rho_row)?;
    let vc = inventory_to_strategy(rho_col)?;
    Ok(bilinear(&vr, &vc, cfg))
}

pub(crate) fn bilinear(vr: &[f64], vc: &[f64], cfg: &MatrixGameConfig) -> (f64, f64) {
    let k = cfg.k;
    let mut r = 0.0;
    let mut c = 0.0;
    for i in 0..k {
        let mut ri = 0.0;
        let mut ci = 0.0;
        for j in 0..k {
            let (a, b) = cfg.entry(i, j);
            ri += a * vc[j];
            ci += b * vc[j];
        }
        r += vr[i] * ri;
        c += vr[i] * ci;
    }
    (r, c)
}

/// Orders an interacting pair as (row, column) or `None` when the pair
/// cannot interact.
pub fn assign_row_col(
    zapper: usize,
    zappee: usize,
    zapper_role: &str,
    zappee_role: &str,
    cfg: &MatrixGameConfig,
) -> Option<(usize, usize)> {
    match cfg.row_assignment {
        RowAssignment::ZapperIsRow => Some((zapper, zappee)),
        RowAssignment::FixedByRole => {
            let row = cfg.row_role.as_deref()?;
            let col = cfg.col_role.as_deref()?;
            if zapper_role == row && zappee_role == col {
                Some((zapper, zappee))
            } else if zapper_role == col && zappee_role == row {
                Some((zappee, zapper))
            } else {
                None
            }
        }
    }
}

/// Whether the episode is over after `steps_done` steps.
pub fn sample_termination(steps_done: u64, law: &Termination, rng: &mut Stream) -> bool {
    law.sample(steps_done, rng)
}

/// Exact game configuration by name.
///
/// Accepts every matrix substrate id (`stag_hunt_arena`,
/// `chicken_repeated`, `running_with_scissors_one_shot`, ...) and the bare
/// game name as shorthand for its arena variant.
pub fn payoff_catalog(name: &str) -> Result<MatrixGameConfig> {
    let reg = crate::registry::Registry::builtin();
    let ids = reg.matrix_ids();
    let id = if ids.iter().any(|i| i == name) {
        name.to_string()
    } else {
        format!("{name}_arena")
    };
    match reg.substrate_config(&id) {
        Ok(cfg) => match cfg.params {
            crate::substrates::Params::Matrix(m) => Ok(m),
            _ => Err(Error::registry("matrix game", name, ids.iter().map(String::as_str))),
        },
        Err(_) => Err(Error::registry("matrix game", name, ids.iter().map(String::as_str))),
    }
}
