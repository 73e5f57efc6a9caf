//! Flat C ABI over the engine, for host-language environment adapters.
//!
//! Episodes live in a process-wide table and are addressed by `u32` handles,
//! so calls on a closed or unknown handle fail with [`MPE_ERR_HANDLE`]
//! instead of touching freed memory. Every multi-byte value crossing the
//! boundary is a little-endian byte sequence:
//!
//! - actions: one `u32` per controlled player;
//! - rewards: one `f64` per controlled player;
//! - observations: `88 × 88 × 3` RGB bytes, row-major.
//!
//! A substrate id gives the caller every slot. A scenario id gives the caller
//! the focal slots only; background bots act inside [`mpe_step`].
//!
//! A handle must not be used from two threads at once. Distinct handles are
//! independent.

use std::collections::HashMap;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex, OnceLock};

use mpe_core::engine::OBS_SIZE;
use mpe_core::eval::{build_scenario, Episode, PopulationSpec};
use mpe_core::{Error, Registry};

pub const MPE_OK: i32 = 0;
pub const MPE_ERR_NULL: i32 = 1;
pub const MPE_ERR_UNKNOWN_ID: i32 = 2;
pub const MPE_ERR_CONFIG: i32 = 3;
pub const MPE_ERR_HANDLE: i32 = 4;
pub const MPE_ERR_ARITY: i32 = 5;
pub const MPE_ERR_ACTION: i32 = 6;
pub const MPE_ERR_DONE: i32 = 7;
pub const MPE_ERR_PLAYER: i32 = 8;
pub const MPE_ERR_BUFFER: i32 = 9;
pub const MPE_ERR_INTERNAL: i32 = 10;

/// Bytes of one observation written by [`mpe_observe`].
pub const MPE_OBS_BYTES: usize = OBS_SIZE * OBS_SIZE * 3;

struct Handle {
    episode: Episode,
    /// Player slots driven by the caller, in caller order.
    external: Vec<usize>,
    spec: Vec<u8>,
}

type Table = HashMap<u32, Arc<Mutex<Handle>>>;

fn table() -> &'static Mutex<Table> {
    static T: OnceLock<Mutex<Table>> = OnceLock::new();
    T.get_or_init(Default::default)
}

fn next_id() -> u32 {
    static NEXT: Mutex<u32> = Mutex::new(1);
    let mut n = NEXT.lock().unwrap_or_else(|e| e.into_inner());
    let id = *n;
    *n = n.wrapping_add(1).max(1);
    id
}

fn guarded(f: impl FnOnce() -> i32) -> i32 {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(MPE_ERR_INTERNAL)
}

/// Runs `f` on `handle` without holding the table lock, so distinct handles
/// step in parallel.
fn with_handle(handle: u32, f: impl FnOnce(&mut Handle) -> i32) -> i32 {
    let h = table().lock().unwrap_or_else(|e| e.into_inner()).get(&handle).cloned();
    match h {
        Some(h) => f(&mut h.lock().unwrap_or_else(|e| e.into_inner())),
        None => MPE_ERR_HANDLE,
    }
}

fn status(e: &Error) -> i32 {
    match e {
        Error::Registry { .. } => MPE_ERR_UNKNOWN_ID,
        Error::Config(_) | Error::Io(_) => MPE_ERR_CONFIG,
        Error::Contract(_) => MPE_ERR_ARITY,
    }
}

fn open(id: &str, seed: u64) -> Result<Handle, Error> {
    let reg = Registry::builtin();
    let (episode, external) = if reg.scenario_ids().iter().any(|s| s == id) {
        let spec = reg.scenario(id)?;
        // focal policies are built but never consulted
        let ep = build_scenario(reg, spec, &PopulationSpec::random(), seed)?;
        let focal = ep.focal.clone();
        (ep, focal)
    } else {
        let sub = reg.substrate(id)?;
        let env = sub.reset_default(seed)?;
        let n = env.num_players();
        let idle = (0..n)
            .map(|i| mpe_core::bots::policy_factory(reg, "noop").map(|f| f.build(i, seed)))
            .collect::<Result<Vec<_>, _>>()?;
        (Episode::new(id, seed, env, idle, (0..n).collect())?, (0..n).collect())
    };
    let env = &episode.env;
    let spec = serde_json::json!({
        "id": id,
        "substrate": env.substrate(),
        "seed": seed,
        "players": external.len(),
        "slots": external,
        "roles": external.iter().map(|&p| env.roles()[p]).collect::<Vec<_>>(),
        "actions": external.iter().map(|&p| env.action_set(p).names().to_vec()).collect::<Vec<_>>(),
        "observation": { "rgb": [OBS_SIZE, OBS_SIZE, 3] },
        "engine_version": mpe_core::VERSION,
    });
    Ok(Handle { episode, external, spec: serde_json::to_vec(&spec).expect("spec serializes") })
}

/// Opens an episode of substrate or scenario `id` and stores its handle in
/// `handle_out`.
///
/// # Safety
/// `id` must be a NUL-terminated string and `handle_out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpe_create(id: *const c_char, seed: u64, handle_out: *mut u32) -> i32 {
    guarded(|| {
        if id.is_null() || handle_out.is_null() {
            return MPE_ERR_NULL;
        }
        let Ok(id) = CStr::from_ptr(id).to_str() else { return MPE_ERR_UNKNOWN_ID };
        match open(id, seed) {
            Ok(h) => {
                let n = next_id();
                table().lock().unwrap_or_else(|e| e.into_inner()).insert(n, Arc::new(Mutex::new(h)));
                *handle_out = n;
                MPE_OK
            }
            Err(e) => status(&e),
        }
    })
}

/// Copies the JSON spec of `handle` into `buf`. `written_out` receives the
/// full length even when `cap` is too small.
///
/// # Safety
/// `buf` must be writable for `cap` bytes and `written_out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpe_spec(handle: u32, buf: *mut u8, cap: usize, written_out: *mut usize) -> i32 {
    guarded(|| {
        if written_out.is_null() {
            return MPE_ERR_NULL;
        }
        with_handle(handle, |h| {
            *written_out = h.spec.len();
            if cap < h.spec.len() {
                return MPE_ERR_BUFFER;
            }
            if buf.is_null() {
                return MPE_ERR_NULL;
            }
            std::ptr::copy_nonoverlapping(h.spec.as_ptr(), buf, h.spec.len());
            MPE_OK
        })
    })
}

/// Advances one step. `actions_ptr` holds `n_actions` little-endian `u32`s,
/// one per controlled player; `rewards_out` receives as many little-endian
/// `f64`s and `done_out` 1 when the episode has ended. Nothing is mutated
/// unless the status is [`MPE_OK`].
///
/// # Safety
/// `actions_ptr` must be readable for `4 * n_actions` bytes, `rewards_out`
/// writable for `8 * n_actions` bytes and `done_out` writable.
#[no_mangle]
pub unsafe extern "C" fn mpe_step(
    handle: u32,
    actions_ptr: *const u8,
    n_actions: u32,
    rewards_out: *mut u8,
    done_out: *mut u8,
) -> i32 {
    guarded(|| {
        if actions_ptr.is_null() || rewards_out.is_null() || done_out.is_null() {
            return MPE_ERR_NULL;
        }
        with_handle(handle, |h| {
            let n = n_actions as usize;
            if n != h.external.len() {
                return MPE_ERR_ARITY;
            }
            if h.episode.env.is_done() {
                return MPE_ERR_DONE;
            }
            let raw = std::slice::from_raw_parts(actions_ptr, 4 * n);
            let mut external = Vec::with_capacity(n);
            for (k, &slot) in h.external.iter().enumerate() {
                let a = u32::from_le_bytes(raw[4 * k..4 * k + 4].try_into().unwrap()) as usize;
                if a >= h.episode.env.action_set(slot).len() {
                    return MPE_ERR_ACTION;
                }
                external.push(a);
            }
            // bots advance their own state when asked, so ask only after validation
            let mut actions = h.episode.actions();
            for (&slot, a) in h.external.iter().zip(external) {
                actions[slot] = a;
            }
            let out = match h.episode.env.step(&actions) {
                Ok(o) => o,
                Err(e) => return status(&e),
            };
            let rewards = std::slice::from_raw_parts_mut(rewards_out, 8 * n);
            for (k, &slot) in h.external.iter().enumerate() {
                rewards[8 * k..8 * k + 8].copy_from_slice(&out.rewards[slot].to_le_bytes());
            }
            *done_out = u8::from(out.done);
            MPE_OK
        })
    })
}

/// Writes the RGB observation of controlled player `player` into
/// `buffer_out`, which must hold at least [`MPE_OBS_BYTES`] bytes.
///
/// # Safety
/// `buffer_out` must be writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn mpe_observe(handle: u32, player: u32, buffer_out: *mut u8, len: usize) -> i32 {
    guarded(|| {
        if buffer_out.is_null() {
            return MPE_ERR_NULL;
        }
        if len < MPE_OBS_BYTES {
            return MPE_ERR_BUFFER;
        }
        with_handle(handle, |h| {
            let Some(&slot) = h.external.get(player as usize) else { return MPE_ERR_PLAYER };
            match h.episode.env.observe(slot) {
                Ok(obs) => {
                    std::ptr::copy_nonoverlapping(obs.rgb.as_ptr(), buffer_out, MPE_OBS_BYTES);
                    MPE_OK
                }
                Err(e) => status(&e),
            }
        })
    })
}

/// Releases `handle`. Closing twice reports [`MPE_ERR_HANDLE`].
#[no_mangle]
pub extern "C" fn mpe_close(handle: u32) -> i32 {
    guarded(|| match table().lock().unwrap_or_else(|e| e.into_inner()).remove(&handle) {
        Some(_) => MPE_OK,
        None => MPE_ERR_HANDLE,
    })
}

/// Static NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn mpe_status_message(code: i32) -> *const c_char {
    let s: &'static [u8] = match code {
        MPE_OK => b"ok\0",
        MPE_ERR_NULL => b"null pointer argument\0",
        MPE_ERR_UNKNOWN_ID => b"unknown substrate or scenario id\0",
        MPE_ERR_CONFIG => b"invalid configuration\0",
        MPE_ERR_HANDLE => b"unknown or closed handle\0",
        MPE_ERR_ARITY => b"wrong number of actions\0",
        MPE_ERR_ACTION => b"action index out of range\0",
        MPE_ERR_DONE => b"episode already finished\0",
        MPE_ERR_PLAYER => b"no such controlled player\0",
        MPE_ERR_BUFFER => b"buffer too small\0",
        MPE_ERR_INTERNAL => b"internal error\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}
