//! C ABI over the `hetflock` simulator.
//!
//! Handles are opaque pointers created by `hf_*_new`/`hf_config_*` and
//! released with the matching `*_free`. Every fallible function returns an
//! [`HfStatus`]; on failure a human-readable message is kept per thread and
//! can be copied out with [`hf_last_error_message`]. Handles are not
//! thread-safe: use one handle from one thread at a time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hetflock::{config, output, Error, ScenarioConfig, Simulation};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    UnknownScenario = 4,
    Parse = 5,
    Instability = 6,
    Coincident = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Snapshot of the per-step statistics. Absent distances are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HfMetrics {
    pub time: f64,
    pub n_edges: usize,
    pub n_components: usize,
    pub mean_all_dist: f64,
    pub mean_conn_dist: f64,
    pub min_conn_dist: f64,
    pub max_conn_dist: f64,
    pub n_violation_edges: usize,
}

/// Opaque scenario configuration.
pub struct HfConfig(ScenarioConfig);

/// Opaque running simulation.
pub struct HfSimulation(Simulation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> HfStatus {
    match err.root() {
        Error::NonFinite(_) | Error::InvalidConfig { .. } => HfStatus::InvalidConfig,
        Error::UnknownScenario { .. } => HfStatus::UnknownScenario,
        Error::Parse(_) | Error::Serialize(_) => HfStatus::Parse,
        Error::Instability { .. } => HfStatus::Instability,
        Error::Coincident { .. } | Error::CoincidentAgents { .. } => HfStatus::Coincident,
        Error::Io(_) => HfStatus::Io,
        Error::AtStep { .. } => unreachable!("root strips step annotations"),
    }
}

fn fail(status: HfStatus, msg: impl Into<String>) -> HfStatus {
    set_error(msg);
    status
}

/// Runs `f`, recording errors and turning panics into `HfStatus::Panic`.
fn guard(f: impl FnOnce() -> Result<(), HfStatus>) -> HfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HfStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(HfStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: hetflock::Result<T>) -> Result<T, HfStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HfStatus> {
    if p.is_null() {
        return Err(fail(HfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, HfStatus> {
    p.as_ref()
        .ok_or_else(|| fail(HfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, HfStatus> {
    p.as_mut()
        .ok_or_else(|| fail(HfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<T>(out: *mut *mut T, value: T) -> Result<(), HfStatus> {
    if out.is_null() {
        return Err(fail(HfStatus::NullPointer, "output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies `s` plus a terminating NUL into `buf`. `required` (if non-null)
/// receives the byte count including the NUL, whether or not it fit.
unsafe fn copy_str(
    s: &str,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> Result<(), HfStatus> {
    let need = s.len() + 1;
    if !required.is_null() {
        *required = need;
    }
    if buf.is_null() || len < need {
        return Err(fail(
            HfStatus::BufferTooSmall,
            format!("need {need} bytes, got {len}"),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to fit). Returns the full message length in bytes
/// excluding the NUL, or 0 when there is no message.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a config from a named preset (`"homogeneous"` or `"heterogeneous"`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_config_preset(
    name: *const c_char,
    out: *mut *mut HfConfig,
) -> HfStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let cfg = lib(ScenarioConfig::preset(name))?;
        out_ptr(out, HfConfig(cfg))
    })
}

/// Parses a TOML config layered onto `default_scenario` (or onto the preset
/// the document names itself).
///
/// # Safety
/// Both strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_config_from_toml(
    text: *const c_char,
    default_scenario: *const c_char,
    out: *mut *mut HfConfig,
) -> HfStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let scenario = str_arg(default_scenario, "default_scenario")?;
        let cfg = lib(config::parse(text, scenario))?;
        out_ptr(out, HfConfig(cfg))
    })
}

/// Writes the fully resolved config as TOML.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes; `required` may be null.
#[no_mangle]
pub unsafe extern "C" fn hf_config_to_toml(
    cfg: *const HfConfig,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> HfStatus {
    guard(|| {
        let cfg = handle(cfg, "config")?;
        let text = lib(config::to_toml(&cfg.0))?;
        copy_str(&text, buf, len, required)
    })
}

/// # Safety
/// `cfg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hf_config_set_seed(cfg: *mut HfConfig, seed: u64) -> HfStatus {
    guard(|| {
        handle_mut(cfg, "config")?.0.seed = seed;
        Ok(())
    })
}

unsafe fn set_f64(
    cfg: *mut HfConfig,
    value: f64,
    what: &str,
    f: impl FnOnce(&mut ScenarioConfig, f64),
) -> HfStatus {
    guard(|| {
        let cfg = handle_mut(cfg, "config")?;
        if !(value.is_finite() && value > 0.0) {
            return Err(fail(
                HfStatus::InvalidArgument,
                format!("{what} must be finite and positive"),
            ));
        }
        f(&mut cfg.0, value);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hf_config_set_duration(cfg: *mut HfConfig, seconds: f64) -> HfStatus {
    set_f64(cfg, seconds, "duration", |c, v| c.duration = v)
}

/// # Safety
/// `cfg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hf_config_set_dt(cfg: *mut HfConfig, seconds: f64) -> HfStatus {
    set_f64(cfg, seconds, "dt", |c, v| c.dt = v)
}

/// # Safety
/// `cfg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hf_config_set_negotiation(cfg: *mut HfConfig, enabled: bool) -> HfStatus {
    guard(|| {
        handle_mut(cfg, "config")?.0.negotiation_enabled = enabled;
        Ok(())
    })
}

/// Worker threads for control evaluation; results do not depend on it.
///
/// # Safety
/// `cfg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hf_config_set_workers(cfg: *mut HfConfig, workers: usize) -> HfStatus {
    guard(|| {
        let cfg = handle_mut(cfg, "config")?;
        if workers == 0 {
            return Err(fail(
                HfStatus::InvalidArgument,
                "workers must be at least 1",
            ));
        }
        cfg.0.workers = workers;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_config_free(cfg: *mut HfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs `cfg` to completion and writes the output bundle (metrics, heatmap,
/// final state, config echo) into `dir`.
///
/// # Safety
/// `cfg` must be a live handle; `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn hf_run_to_dir(cfg: *const HfConfig, dir: *const c_char) -> HfStatus {
    guard(|| {
        let cfg = handle(cfg, "config")?;
        let dir = str_arg(dir, "dir")?;
        lib(output::run_to_dir(&cfg.0, Path::new(dir))).map(|_| ())
    })
}

/// Validates `cfg` and draws the initial state from its seed. The config
/// handle stays owned by the caller.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_new(cfg: *const HfConfig, out: *mut *mut HfSimulation) -> HfStatus {
    guard(|| {
        let cfg = handle(cfg, "config")?;
        let sim = lib(Simulation::new(cfg.0.clone()))?;
        out_ptr(out, HfSimulation(sim))
    })
}

/// Advances `n_steps` steps, stopping at the first error.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_step(sim: *mut HfSimulation, n_steps: usize) -> HfStatus {
    guard(|| {
        let sim = handle_mut(sim, "simulation")?;
        for _ in 0..n_steps {
            lib(sim.0.step())?;
        }
        Ok(())
    })
}

/// Steps until the configured duration has elapsed.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_run(sim: *mut HfSimulation) -> HfStatus {
    guard(|| {
        let sim = handle_mut(sim, "simulation")?;
        while sim.0.state().step < sim.0.config().steps() {
            lib(sim.0.step())?;
        }
        Ok(())
    })
}

/// Number of agents, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_n_agents(sim: *const HfSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.0.state().agents.len())
}

/// Simulated time in seconds, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_time(sim: *const HfSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.0.state().time)
}

unsafe fn write_xy(
    sim: *const HfSimulation,
    xy: *mut f64,
    len: usize,
    pick: impl Fn(&hetflock::AgentState) -> hetflock::Vec2,
) -> HfStatus {
    guard(|| {
        let sim = handle(sim, "simulation")?;
        let agents = &sim.0.state().agents;
        if xy.is_null() {
            return Err(fail(HfStatus::NullPointer, "output buffer is null"));
        }
        if len < 2 * agents.len() {
            return Err(fail(
                HfStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", 2 * agents.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(xy, 2 * agents.len());
        for (cell, a) in out.chunks_exact_mut(2).zip(agents) {
            let v = pick(a);
            cell[0] = v.x;
            cell[1] = v.y;
        }
        Ok(())
    })
}

/// Writes interleaved `x0, y0, x1, y1, ...` positions; `len` counts doubles.
///
/// # Safety
/// `xy` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_positions(
    sim: *const HfSimulation,
    xy: *mut f64,
    len: usize,
) -> HfStatus {
    write_xy(sim, xy, len, |a| a.position)
}

/// Writes interleaved velocities; `len` counts doubles.
///
/// # Safety
/// `xy` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_velocities(
    sim: *const HfSimulation,
    xy: *mut f64,
    len: usize,
) -> HfStatus {
    write_xy(sim, xy, len, |a| a.velocity)
}

/// Statistics of the current state.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_metrics(sim: *const HfSimulation, out: *mut HfMetrics) -> HfStatus {
    guard(|| {
        let sim = handle(sim, "simulation")?;
        let out = out
            .as_mut()
            .ok_or_else(|| fail(HfStatus::NullPointer, "output pointer is null"))?;
        let f = sim.0.frame();
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        *out = HfMetrics {
            time: f.time,
            n_edges: f.n_edges,
            n_components: f.n_components,
            mean_all_dist: nan(f.mean_all_dist),
            mean_conn_dist: nan(f.mean_conn_dist),
            min_conn_dist: nan(f.min_conn_dist),
            max_conn_dist: nan(f.max_conn_dist),
            n_violation_edges: f.n_violation_edges,
        };
        Ok(())
    })
}

/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hf_sim_free(sim: *mut HfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
