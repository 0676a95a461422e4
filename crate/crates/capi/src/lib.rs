//! C ABI for the rlncsim library.
//!
//! Handles are opaque pointers created and destroyed here; every function
//! returns an `RLNC_*` status code and reports results through out
//! parameters. On any non-zero return, [`rlnc_last_error_message`] yields a
//! malloc'd description for the calling thread (free it with
//! [`rlnc_string_free`]). All entry points catch panics and convert them to
//! `RLNC_ERR_PANIC`, so unwinds never cross the FFI boundary.

use rlncsim::config::{ConfigError, ExperimentConfig};
use rlncsim::coding::invertibility_probability;
use rlncsim::exponents::{
    chernoff_exponent_numeric, error_exponent, poisson_tail_bounds, ExponentError,
};
use rlncsim::flows::{min_cut_capacity, multicast_capacity, FlowError};
use rlncsim::network::{Network, NetworkError};
use rlncsim::rate::rate_to_f64;
use rlncsim::simulator::{measure_achieved_rate, run_batch, SimConfig, SimError};
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

pub const RLNC_OK: c_int = 0;
/// A required pointer argument was null.
pub const RLNC_ERR_NULL_ARG: c_int = 1;
/// A string argument was not valid UTF-8.
pub const RLNC_ERR_UTF8: c_int = 2;
/// Input text failed to parse.
pub const RLNC_ERR_PARSE: c_int = 3;
/// Input parsed but violates a model invariant.
pub const RLNC_ERR_VALIDATION: c_int = 4;
/// A numeric argument is outside its mathematical domain.
pub const RLNC_ERR_DOMAIN: c_int = 5;
/// File I/O failed.
pub const RLNC_ERR_IO: c_int = 6;
/// A validated run failed while executing.
pub const RLNC_ERR_RUNTIME: c_int = 7;
/// An internal panic was caught at the boundary.
pub const RLNC_ERR_PANIC: c_int = 8;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let cleaned: Vec<u8> = msg.bytes().filter(|&b| b != 0).collect();
    let cstring = CString::new(cleaned).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn fail(code: c_int, msg: &str) -> c_int {
    set_error(msg);
    code
}

fn network_code(e: &NetworkError) -> c_int {
    match e {
        NetworkError::Syntax { .. } => RLNC_ERR_PARSE,
        _ => RLNC_ERR_VALIDATION,
    }
}

fn config_code(e: &ConfigError) -> c_int {
    match e {
        ConfigError::Syntax { .. } => RLNC_ERR_PARSE,
        ConfigError::Io { .. } => RLNC_ERR_IO,
        ConfigError::Network(inner) => network_code(inner),
        _ => RLNC_ERR_VALIDATION,
    }
}

fn sim_code(e: &SimError) -> c_int {
    match e {
        SimError::AllTimedOut => RLNC_ERR_RUNTIME,
        _ => RLNC_ERR_VALIDATION,
    }
}

fn flow_code(_: &FlowError) -> c_int {
    RLNC_ERR_VALIDATION
}

fn exponent_code(e: &ExponentError) -> c_int {
    match e {
        ExponentError::Domain { .. } | ExponentError::BadRate(_) | ExponentError::BadDelta(_) => {
            RLNC_ERR_DOMAIN
        }
        ExponentError::Sim(inner) => sim_code(inner),
        _ => RLNC_ERR_VALIDATION,
    }
}

/// Runs `f` with panics converted to `RLNC_ERR_PANIC`.
fn guarded(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            fail(RLNC_ERR_PANIC, &format!("internal panic: {msg}"))
        }
    }
}

/// Borrows a C string argument; sets the thread error on failure.
///
/// # Safety
/// `ptr` must be null or a nul-terminated string valid for the call.
unsafe fn arg_str<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        return Err(fail(RLNC_ERR_NULL_ARG, &format!("{name} is null")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| fail(RLNC_ERR_UTF8, &format!("{name} is not valid UTF-8")))
}

fn out_ref<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, c_int> {
    if ptr.is_null() {
        return Err(fail(RLNC_ERR_NULL_ARG, &format!("{name} is null")));
    }
    Ok(unsafe { &mut *ptr })
}

/// Most recent error on this thread as a malloc'd string, or null if none.
/// The caller owns the copy; release it with [`rlnc_string_free`].
#[no_mangle]
pub extern "C" fn rlnc_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string returned by this library. Null is a no-op.
#[no_mangle]
pub extern "C" fn rlnc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Opaque parsed network.
pub struct RlncNetwork {
    inner: Network,
}

/// Opaque validated experiment: a network plus simulation parameters.
pub struct RlncExperiment {
    sim: SimConfig,
    trials: u64,
}

/// Aggregate outcome of a batch of trials.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlncSummary {
    pub trials: u64,
    /// Trials in which every sink decoded all K messages.
    pub successes: u64,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub timeouts: u64,
    /// Mean completion time over completed rateless trials; NaN when
    /// unavailable.
    pub mean_completion_time: f64,
}

/// Rateless achieved-rate measurement.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlncAchievedRate {
    /// Mean K / completion-time over completed trials.
    pub rate: f64,
    pub mean_completion_time: f64,
    pub completed: u64,
    pub trials: u64,
}

/// Parses a network description into a new handle.
///
/// # Safety
/// `text` must be a valid nul-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn rlnc_network_parse(
    text: *const c_char,
    out: *mut *mut RlncNetwork,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        let text = match unsafe { arg_str(text, "text") } {
            Ok(t) => t,
            Err(code) => return code,
        };
        match Network::parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RlncNetwork { inner }));
                RLNC_OK
            }
            Err(e) => fail(network_code(&e), &e.to_string()),
        }
    })
}

/// Releases a network handle. Null is a no-op.
///
/// # Safety
/// `net` must be null or a pointer from [`rlnc_network_parse`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn rlnc_network_free(net: *mut RlncNetwork) {
    if !net.is_null() {
        drop(unsafe { Box::from_raw(net) });
    }
}

/// # Safety
/// `net` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlnc_network_node_count(
    net: *const RlncNetwork,
    out: *mut usize,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        if net.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "net is null");
        }
        *out = unsafe { &*net }.inner.node_count();
        RLNC_OK
    })
}

/// Looks up a node id by label.
///
/// # Safety
/// `net`, `label`, and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlnc_network_node_id(
    net: *const RlncNetwork,
    label: *const c_char,
    out: *mut usize,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        if net.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "net is null");
        }
        let label = match unsafe { arg_str(label, "label") } {
            Ok(l) => l,
            Err(code) => return code,
        };
        match unsafe { &*net }.inner.node_id(label) {
            Some(id) => {
                *out = id;
                RLNC_OK
            }
            None => fail(RLNC_ERR_VALIDATION, &format!("unknown node {label:?}")),
        }
    })
}

/// Canonical text form of the network, as a malloc'd string.
///
/// # Safety
/// `net` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlnc_network_serialize(
    net: *const RlncNetwork,
    out: *mut *mut c_char,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        if net.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "net is null");
        }
        let text = unsafe { &*net }.inner.serialize();
        match CString::new(text) {
            Ok(c) => {
                *out = c.into_raw();
                RLNC_OK
            }
            Err(_) => fail(RLNC_ERR_PANIC, "serialized text contained a nul byte"),
        }
    })
}

/// Min-cut capacity between two nodes, as a double (the library computes it
/// exactly; this rounds once at the boundary).
///
/// # Safety
/// `net` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlnc_network_min_cut_capacity(
    net: *const RlncNetwork,
    source: usize,
    sink: usize,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        if net.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "net is null");
        }
        match min_cut_capacity(&unsafe { &*net }.inner, source, sink) {
            Ok(cap) => {
                *out = rate_to_f64(&cap);
                RLNC_OK
            }
            Err(e) => fail(flow_code(&e), &e.to_string()),
        }
    })
}

/// Multicast capacity: the minimum over `sinks` of the per-sink min cut.
///
/// # Safety
/// `net` and `out` must be valid; `sinks` must point to `n_sinks` ids.
#[no_mangle]
pub unsafe extern "C" fn rlnc_network_multicast_capacity(
    net: *const RlncNetwork,
    source: usize,
    sinks: *const usize,
    n_sinks: usize,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        if net.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "net is null");
        }
        if sinks.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "sinks is null");
        }
        let sinks = unsafe { std::slice::from_raw_parts(sinks, n_sinks) };
        match multicast_capacity(&unsafe { &*net }.inner, source, sinks) {
            Ok(cap) => {
                *out = rate_to_f64(&cap);
                RLNC_OK
            }
            Err(e) => fail(flow_code(&e), &e.to_string()),
        }
    })
}

/// C - R - R ln(C/R), the asymptotic error exponent, in nats per unit time.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rlnc_error_exponent(c: f64, r: f64, out: *mut f64) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match error_exponent(c, r) {
            Ok(v) => {
                *out = v;
                RLNC_OK
            }
            Err(e) => fail(exponent_code(&e), &e.to_string()),
        }
    })
}

/// The same exponent via numeric Chernoff optimization.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rlnc_chernoff_exponent_numeric(
    c: f64,
    r: f64,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match chernoff_exponent_numeric(c, r) {
            Ok(v) => {
                *out = v;
                RLNC_OK
            }
            Err(e) => fail(exponent_code(&e), &e.to_string()),
        }
    })
}

/// Poisson-tail lower bound and Chernoff upper bound on the decoding error
/// probability at a finite delta.
///
/// # Safety
/// `lower` and `upper` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlnc_poisson_tail_bounds(
    c: f64,
    r: f64,
    delta: f64,
    lower: *mut f64,
    upper: *mut f64,
) -> c_int {
    guarded(|| {
        let lower = match out_ref(lower, "lower") {
            Ok(v) => v,
            Err(code) => return code,
        };
        let upper = match out_ref(upper, "upper") {
            Ok(v) => v,
            Err(code) => return code,
        };
        match poisson_tail_bounds(c, r, delta) {
            Ok(b) => {
                *lower = b.lower_pe();
                *upper = b.upper_pe();
                RLNC_OK
            }
            Err(e) => fail(exponent_code(&e), &e.to_string()),
        }
    })
}

/// Probability that a random K x K matrix over GF(q) is invertible.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rlnc_invertibility_probability(
    k: usize,
    q: u32,
    out: *mut f64,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(v) => v,
            Err(code) => return code,
        };
        if k == 0 {
            return fail(RLNC_ERR_DOMAIN, "k must be at least 1");
        }
        if q < 2 {
            return fail(RLNC_ERR_DOMAIN, "q must be at least 2");
        }
        *out = invertibility_probability(k, q);
        RLNC_OK
    })
}

fn build_experiment(
    cfg: &ExperimentConfig,
    net: &Network,
    out: &mut *mut RlncExperiment,
) -> c_int {
    match cfg.sim_config(net) {
        Ok(sim) => {
            let trials = cfg.trials.unwrap_or(1);
            *out = Box::into_raw(Box::new(RlncExperiment { sim, trials }));
            RLNC_OK
        }
        Err(e) => fail(config_code(&e), &e.to_string()),
    }
}

/// Builds an experiment from config text plus network text (no file I/O).
/// The config's `network` key is ignored in this form. Trials default to 1
/// if the config does not set them.
///
/// # Safety
/// All pointers must be valid; strings nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn rlnc_experiment_parse(
    config_text: *const c_char,
    network_text: *const c_char,
    out: *mut *mut RlncExperiment,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        let config_text = match unsafe { arg_str(config_text, "config_text") } {
            Ok(t) => t,
            Err(code) => return code,
        };
        let network_text = match unsafe { arg_str(network_text, "network_text") } {
            Ok(t) => t,
            Err(code) => return code,
        };
        let cfg = match ExperimentConfig::parse(config_text) {
            Ok(c) => c,
            Err(e) => return fail(config_code(&e), &e.to_string()),
        };
        let net = match Network::parse(network_text) {
            Ok(n) => n,
            Err(e) => return fail(network_code(&e), &e.to_string()),
        };
        build_experiment(&cfg, &net, out)
    })
}

/// Builds an experiment by reading a config file; the network file is
/// resolved relative to it.
///
/// # Safety
/// `config_path` must be a valid nul-terminated string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn rlnc_experiment_load(
    config_path: *const c_char,
    out: *mut *mut RlncExperiment,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        let path = match unsafe { arg_str(config_path, "config_path") } {
            Ok(p) => p,
            Err(code) => return code,
        };
        match ExperimentConfig::load(Path::new(path)) {
            Ok((cfg, net)) => build_experiment(&cfg, &net, out),
            Err(e) => fail(config_code(&e), &e.to_string()),
        }
    })
}

/// Releases an experiment handle. Null is a no-op.
///
/// # Safety
/// `exp` must be null or an unfreed experiment pointer.
#[no_mangle]
pub unsafe extern "C" fn rlnc_experiment_free(exp: *mut RlncExperiment) {
    if !exp.is_null() {
        drop(unsafe { Box::from_raw(exp) });
    }
}

/// # Safety
/// `exp` must be a valid experiment pointer.
#[no_mangle]
pub unsafe extern "C" fn rlnc_experiment_set_seed(exp: *mut RlncExperiment, seed: u64) -> c_int {
    guarded(|| {
        if exp.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "exp is null");
        }
        unsafe { &mut *exp }.sim.seed = seed;
        RLNC_OK
    })
}

/// # Safety
/// `exp` must be a valid experiment pointer.
#[no_mangle]
pub unsafe extern "C" fn rlnc_experiment_set_trials(
    exp: *mut RlncExperiment,
    trials: u64,
) -> c_int {
    guarded(|| {
        if exp.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "exp is null");
        }
        if trials == 0 {
            return fail(RLNC_ERR_VALIDATION, "trials must be at least 1");
        }
        unsafe { &mut *exp }.trials = trials;
        RLNC_OK
    })
}

/// Runs the configured batch and fills `out` with the aggregate.
///
/// # Safety
/// `exp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlnc_experiment_run(
    exp: *const RlncExperiment,
    out: *mut RlncSummary,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        if exp.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "exp is null");
        }
        let exp = unsafe { &*exp };
        match run_batch(&exp.sim, exp.trials) {
            Ok(summary) => {
                *out = RlncSummary {
                    trials: summary.trials,
                    successes: summary.all_sinks_successes,
                    frequency: summary.all_sinks_successes as f64 / summary.trials as f64,
                    wilson_lo: summary.all_sinks_wilson.0,
                    wilson_hi: summary.all_sinks_wilson.1,
                    timeouts: summary.timeouts,
                    mean_completion_time: summary.mean_completion_time.unwrap_or(f64::NAN),
                };
                RLNC_OK
            }
            Err(e) => fail(sim_code(&e), &e.to_string()),
        }
    })
}

/// Measures K/T over rateless trials; requires `mode rateless`.
///
/// # Safety
/// `exp` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlnc_experiment_achieved_rate(
    exp: *const RlncExperiment,
    out: *mut RlncAchievedRate,
) -> c_int {
    guarded(|| {
        let out = match out_ref(out, "out") {
            Ok(r) => r,
            Err(code) => return code,
        };
        if exp.is_null() {
            return fail(RLNC_ERR_NULL_ARG, "exp is null");
        }
        let exp = unsafe { &*exp };
        match measure_achieved_rate(&exp.sim, exp.trials) {
            Ok(measured) => {
                *out = RlncAchievedRate {
                    rate: measured.rate,
                    mean_completion_time: measured.mean_completion_time,
                    completed: measured.completed,
                    trials: measured.trials,
                };
                RLNC_OK
            }
            Err(e) => fail(sim_code(&e), &e.to_string()),
        }
    })
}
