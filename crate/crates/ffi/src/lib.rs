//! C ABI over `linksched`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free` function. Every fallible call returns an
//! [`LsStatus`]; on failure a message is available from
//! [`ls_last_error_message`] on the same thread until the next failing call.
//! Strings returned through out-parameters must be released with
//! [`ls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linksched::adaptive::{adaptive_max_link_schedule, AdaptiveConfig};
use linksched::harness::{generate_instance, GenSpec};
use linksched::oracle::{brute_force_opt, centralized_greedy};
use linksched::scheduler::{max_link_schedule, Preset, ScheduleResult, SchedulerConfig};
use linksched::sinr::is_independent;
use linksched::{Duplex, Instance, LinkId};

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// The library reported an error; see the last error message.
    Failed = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LsAlgorithm {
    Centralized = 0,
    DistributedNonadaptive = 1,
    DistributedAdaptive = 2,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LsDuplex {
    Half = 0,
    Full = 1,
}

#[repr(C)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LsPreset {
    TheorySafe = 0,
    Practical = 1,
}

/// An instance: nodes, links and physical parameters.
pub struct LsInstance(Instance);

/// The outcome of one scheduling run.
pub struct LsSchedule(ScheduleResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

type Res<T> = Result<T, LsStatus>;

fn fail<T>(status: LsStatus, msg: impl Into<String>) -> Res<T> {
    set_error(msg);
    Err(status)
}

fn lib<T>(r: linksched::Result<T>) -> Res<T> {
    r.or_else(|e| fail(LsStatus::Failed, e.to_string()))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Res<()>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            LsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    if p.is_null() {
        return fail(LsStatus::NullPointer, format!("{what} is null"));
    }
    Ok(&*p)
}

unsafe fn out<T>(p: *mut T, value: T) -> Res<()> {
    if p.is_null() {
        return fail(LsStatus::NullPointer, "output pointer is null");
    }
    p.write(value);
    Ok(())
}

fn into_c_string(s: String) -> Res<*mut c_char> {
    match CString::new(s) {
        Ok(c) => Ok(c.into_raw()),
        Err(_) => fail(LsStatus::Failed, "string contains an interior NUL"),
    }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from its JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_from_json(json: *const c_char, out_instance: *mut *mut LsInstance) -> LsStatus {
    guard(|| {
        let text = deref(json, "json")?;
        let text = CStr::from_ptr(text)
            .to_str()
            .or_else(|_| fail(LsStatus::InvalidUtf8, "json is not valid UTF-8"))?;
        let inst = lib(Instance::from_json(text))?;
        out(out_instance, Box::into_raw(Box::new(LsInstance(inst))))
    })
}

/// Random instance with senders uniform in `[0, side]^2` and lengths
/// log-uniform in `[d_min, d_max]`.
///
/// # Safety
/// Out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_generate(
    seed: u64,
    m: usize,
    side: f64,
    d_min: f64,
    d_max: f64,
    out_instance: *mut *mut LsInstance,
) -> LsStatus {
    guard(|| {
        let inst = lib(generate_instance(seed, &GenSpec { m, side, d_min, d_max }))?;
        out(out_instance, Box::into_raw(Box::new(LsInstance(inst))))
    })
}

/// # Safety
/// `inst` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_free(inst: *mut LsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Number of links, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_link_count(inst: *const LsInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.0.m())
}

/// # Safety
/// `inst` must be a live handle; out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_instance_to_json(inst: *const LsInstance, out_json: *mut *mut c_char) -> LsStatus {
    guard(|| {
        let inst = deref(inst, "instance")?;
        let s = into_c_string(lib(inst.0.to_json())?)?;
        out(out_json, s)
    })
}

fn schedule(inst: &Instance, algorithm: LsAlgorithm, duplex: Duplex, preset: Preset, seed: u64) -> Res<ScheduleResult> {
    let params = inst.params;
    match algorithm {
        LsAlgorithm::Centralized => {
            let cfg = SchedulerConfig::preset(preset, &params, duplex, seed);
            lib(cfg.validate(&params))?;
            let selected = lib(centralized_greedy(inst, cfg.psi_prime(&params), cfg.gamma1))?;
            Ok(ScheduleResult {
                selected,
                ..ScheduleResult::default()
            })
        }
        LsAlgorithm::DistributedNonadaptive => {
            lib(max_link_schedule(inst, &SchedulerConfig::preset(preset, &params, duplex, seed)))
        }
        LsAlgorithm::DistributedAdaptive => {
            let (sched, adaptive) = AdaptiveConfig::preset(preset, &params, duplex, seed);
            lib(adaptive_max_link_schedule(inst, &sched, &adaptive))
        }
    }
}

/// Runs a scheduler on `inst` with a preset's constants.
///
/// # Safety
/// `inst` must be a live handle; the enum arguments must hold declared
/// values; out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_schedule_run(
    inst: *const LsInstance,
    algorithm: LsAlgorithm,
    duplex: LsDuplex,
    preset: LsPreset,
    seed: u64,
    out_schedule: *mut *mut LsSchedule,
) -> LsStatus {
    guard(|| {
        let inst = deref(inst, "instance")?;
        let duplex = match duplex {
            LsDuplex::Half => Duplex::Half,
            LsDuplex::Full => Duplex::Full,
        };
        let preset = match preset {
            LsPreset::TheorySafe => Preset::TheorySafe,
            LsPreset::Practical => Preset::Practical,
        };
        let res = schedule(&inst.0, algorithm, duplex, preset, seed)?;
        out(out_schedule, Box::into_raw(Box::new(LsSchedule(res))))
    })
}

/// # Safety
/// `s` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ls_schedule_free(s: *mut LsSchedule) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of selected links, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_schedule_selected_count(s: *const LsSchedule) -> usize {
    s.as_ref().map_or(0, |s| s.0.selected.len())
}

/// Copies the selected link ids into `buf`. Fails with `BufferTooSmall`
/// (and still reports the needed length) when `len` is too short.
///
/// # Safety
/// `buf` must hold `len` writable elements (may be null when `len` is 0);
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_schedule_selected(
    s: *const LsSchedule,
    buf: *mut u32,
    len: usize,
    written: *mut usize,
) -> LsStatus {
    guard(|| {
        let s = deref(s, "schedule")?;
        let ids = &s.0.selected;
        out(written, ids.len())?;
        if len < ids.len() {
            return fail(LsStatus::BufferTooSmall, format!("need {} entries, got {len}", ids.len()));
        }
        if ids.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return fail(LsStatus::NullPointer, "buffer is null");
        }
        for (k, id) in ids.iter().enumerate() {
            buf.add(k).write(id.0);
        }
        Ok(())
    })
}

/// Schedule length in slots, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_schedule_total_slots(s: *const LsSchedule) -> u64 {
    s.as_ref().map_or(0, |s| s.0.total_slots)
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ls_schedule_timed_out(s: *const LsSchedule) -> bool {
    s.as_ref().is_some_and(|s| s.0.timed_out)
}

/// # Safety
/// `s` must be a live handle; out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_schedule_to_json(s: *const LsSchedule, out_json: *mut *mut c_char) -> LsStatus {
    guard(|| {
        let s = deref(s, "schedule")?;
        let text = serde_json_string(&s.0)?;
        out(out_json, into_c_string(text)?)
    })
}

fn serde_json_string(r: &ScheduleResult) -> Res<String> {
    serde_json::to_string(r).or_else(|e| fail(LsStatus::Failed, e.to_string()))
}

/// Whether the given links can all transmit successfully in one slot.
///
/// # Safety
/// `inst` must be a live handle; `links` must hold `len` elements (may be
/// null when `len` is 0); out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_is_independent(
    inst: *const LsInstance,
    links: *const u32,
    len: usize,
    out_independent: *mut bool,
) -> LsStatus {
    guard(|| {
        let inst = deref(inst, "instance")?;
        let ids: &[u32] = if len == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(deref(links, "links")?, len)
        };
        if let Some(bad) = ids.iter().find(|&&l| l as usize >= inst.0.m()) {
            return fail(LsStatus::InvalidArgument, format!("unknown link {bad}"));
        }
        let ids: Vec<LinkId> = ids.iter().map(|&l| LinkId(l)).collect();
        let verdict = is_independent(&inst.0.placed_set(&ids), &inst.0.params);
        out(out_independent, verdict.passed())
    })
}

/// Size of a maximum independent set, by exhaustive search. Refuses
/// instances with more than `max_m` links.
///
/// # Safety
/// `inst` must be a live handle; out-parameters must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_brute_force_opt(inst: *const LsInstance, max_m: usize, out_size: *mut usize) -> LsStatus {
    guard(|| {
        let inst = deref(inst, "instance")?;
        let opt = lib(brute_force_opt(&inst.0, max_m))?;
        out(out_size, opt.size)
    })
}
