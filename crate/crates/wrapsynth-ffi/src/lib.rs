//! C interface. Every entry point returns a [`WsStatus`]; on failure the
//! message is available from [`ws_last_error`] on the same thread. Handles
//! are opaque and owned by the caller until passed to the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wrapsynth::cli::{parse_state, render_state};
use wrapsynth::eval::apply_tf;
use wrapsynth::isa::{parse_block, Block, Interp, LslModes, MAX_WIDTH, MIN_WIDTH};
use wrapsynth::oracle::{check_tf, OracleError};
use wrapsynth::synth::{synthesize, Strategy, SynthConfig, SynthError};
use wrapsynth::tf::{Domain, TransferFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStatus {
    Ok = 0,
    /// Verification found an unsound output.
    Unsound = 1,
    InvalidArgument = 2,
    Parse = 3,
    ResourceLimit = 4,
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsDomain {
    Interval = 0,
    Octagon = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStrategy {
    Ladder = 0,
    Exact = 1,
    Relational = 2,
    Const = 3,
    Medium = 4,
}

/// Synthesis options. `conflict_budget` 0 means unlimited.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WsSynthOptions {
    pub domain: WsDomain,
    pub strategy: WsStrategy,
    pub drop_redundant: bool,
    pub conflict_budget: u64,
}

/// A parsed basic block.
pub struct WsBlock(Block);

/// A synthesized or parsed transfer function.
pub struct WsTransferFunction(TransferFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Outcome = Result<WsStatus, (WsStatus, String)>;

fn guard(f: impl FnOnce() -> Outcome) -> WsStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            WsStatus::Internal
        }
    }
}

fn invalid(msg: &str) -> (WsStatus, String) {
    (WsStatus::InvalidArgument, msg.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (WsStatus, String)> {
    if p.is_null() {
        return Err(invalid(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(&format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (WsStatus, String)> {
    p.as_ref().ok_or_else(|| invalid(&format!("{what} is null")))
}

unsafe fn out_arg<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(WsStatus::Ok)
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Outcome {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = CString::new(s).map_err(|_| (WsStatus::Internal, "nul in output".to_string()))?.into_raw();
    Ok(WsStatus::Ok)
}

fn synth_status(e: SynthError) -> (WsStatus, String) {
    let s = if e.is_resource_limit() { WsStatus::ResourceLimit } else { WsStatus::InvalidArgument };
    (s, e.to_string())
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ws_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default options: octagon domain, full strategy ladder, no budget.
#[no_mangle]
pub extern "C" fn ws_synth_options_default() -> WsSynthOptions {
    WsSynthOptions { domain: WsDomain::Octagon, strategy: WsStrategy::Ladder, drop_redundant: false, conflict_budget: 0 }
}

/// Parses assembly text. `width` 0 keeps the block's own (default 32).
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_block_parse(text: *const c_char, width: u32, out: *mut *mut WsBlock) -> WsStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let mut b = parse_block(text).map_err(|e| (WsStatus::Parse, e.to_string()))?;
        if width != 0 {
            if !(MIN_WIDTH..=MAX_WIDTH).contains(&width) {
                return Err(invalid(&format!("width {width} out of range")));
            }
            b = b.with_width(width);
        }
        out_arg(out, WsBlock(b))
    })
}

/// Sets the interpretation: `is_unsigned` selects unsigned, else signed.
///
/// # Safety
/// `block` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_block_set_unsigned(block: *mut WsBlock, is_unsigned: bool) -> WsStatus {
    guard(|| {
        let b = block.as_mut().ok_or_else(|| invalid("block is null"))?;
        b.0.interp = if is_unsigned { Interp::Unsigned } else { Interp::Signed };
        Ok(WsStatus::Ok)
    })
}

/// Gives `LSL` the four signed modes instead of the carry-out pair.
///
/// # Safety
/// `block` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ws_block_set_lsl_signed(block: *mut WsBlock, enable: bool) -> WsStatus {
    guard(|| {
        let b = block.as_mut().ok_or_else(|| invalid("block is null"))?;
        b.0.lsl_modes = if enable { LslModes::Signed } else { LslModes::Carry };
        Ok(WsStatus::Ok)
    })
}

/// # Safety
/// `block` must be null or a handle from [`ws_block_parse`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ws_block_free(block: *mut WsBlock) {
    if !block.is_null() {
        drop(Box::from_raw(block));
    }
}

/// Synthesizes a transfer function. `options` may be null for defaults.
///
/// # Safety
/// `block` must be a live handle, `options` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ws_synthesize(
    block: *const WsBlock,
    options: *const WsSynthOptions,
    out: *mut *mut WsTransferFunction,
) -> WsStatus {
    guard(|| {
        let b = ref_arg(block, "block")?;
        let o = options.as_ref().copied().unwrap_or_else(|| ws_synth_options_default());
        let cfg = SynthConfig {
            domain: match o.domain {
                WsDomain::Interval => Domain::Interval,
                WsDomain::Octagon => Domain::Octagon,
            },
            strategy: match o.strategy {
                WsStrategy::Ladder => Strategy::Ladder,
                WsStrategy::Exact => Strategy::Exact,
                WsStrategy::Relational => Strategy::Relational,
                WsStrategy::Const => Strategy::Const,
                WsStrategy::Medium => Strategy::Medium,
            },
            drop_redundant: o.drop_redundant,
            conflict_budget: (o.conflict_budget != 0).then_some(o.conflict_budget),
            ..SynthConfig::default()
        };
        let s = synthesize(&b.0, &cfg).map_err(synth_status)?;
        out_arg(out, WsTransferFunction(s.tf))
    })
}

/// Parses a transfer function in text or JSON form.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_tf_parse(text: *const c_char, out: *mut *mut WsTransferFunction) -> WsStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let tf = if text.trim_start().starts_with('{') {
            TransferFunction::from_json(text)
        } else {
            TransferFunction::from_text(text)
        }
        .map_err(|e| (WsStatus::Parse, e.to_string()))?;
        out_arg(out, WsTransferFunction(tf))
    })
}

/// Serializes as JSON (`json` true) or text. Free the string with
/// [`ws_string_free`].
///
/// # Safety
/// `tf` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_tf_serialize(tf: *const WsTransferFunction, json: bool, out: *mut *mut c_char) -> WsStatus {
    guard(|| {
        let tf = &ref_arg(tf, "tf")?.0;
        out_string(out, if json { tf.to_json() } else { tf.to_text() })
    })
}

/// Number of guarded-update pairs.
///
/// # Safety
/// `tf` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ws_tf_pair_count(tf: *const WsTransferFunction, out: *mut usize) -> WsStatus {
    guard(|| {
        let tf = &ref_arg(tf, "tf")?.0;
        let out = out.as_mut().ok_or_else(|| invalid("output pointer is null"))?;
        *out = tf.pairs.len();
        Ok(WsStatus::Ok)
    })
}

/// Applies the function to a state expression such as
/// `"-10 <= R0 <= 5, R0+R1 <= 3"`; writes the rendered output state.
///
/// # Safety
/// `tf` must be a live handle, `state` a nul-terminated string, `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ws_tf_apply(tf: *const WsTransferFunction, state: *const c_char, out: *mut *mut c_char) -> WsStatus {
    guard(|| {
        let tf = &ref_arg(tf, "tf")?.0;
        let state = str_arg(state, "state")?;
        let input = parse_state(state, &tf.registers).map_err(|e| (WsStatus::Parse, e))?;
        out_string(out, render_state(&apply_tf(tf, &input), &tf.registers))
    })
}

/// Checks `tf` against brute force on `block` and writes the JSON report.
/// Returns [`WsStatus::Unsound`] when the report is not clean.
///
/// # Safety
/// Handles must be live; `report` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn ws_verify(
    tf: *const WsTransferFunction,
    block: *const WsBlock,
    samples: usize,
    seed: u64,
    report: *mut *mut c_char,
) -> WsStatus {
    guard(|| {
        let tf = &ref_arg(tf, "tf")?.0;
        let b = &ref_arg(block, "block")?.0;
        let r = check_tf(tf, b, samples, seed).map_err(|e| match e {
            OracleError::Budget(_) => (WsStatus::ResourceLimit, e.to_string()),
            OracleError::Mismatch(_) => (WsStatus::InvalidArgument, e.to_string()),
        })?;
        if !report.is_null() {
            out_string(report, r.to_json())?;
        }
        Ok(if r.is_clean() { WsStatus::Ok } else { WsStatus::Unsound })
    })
}

/// # Safety
/// `tf` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ws_tf_free(tf: *mut WsTransferFunction) {
    if !tf.is_null() {
        drop(Box::from_raw(tf));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ws_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
