use std::ffi::{c_char, CStr, CString};
use std::ptr;
use wrapsynth_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ws_last_error()) }.to_str().unwrap().to_string()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    ws_string_free(s);
    out
}

unsafe fn block(text: &str, width: u32) -> *mut WsBlock {
    let mut b = ptr::null_mut();
    assert_eq!(ws_block_parse(cstr(text).as_ptr(), width, &mut b), WsStatus::Ok, "{}", last_error());
    b
}

#[test]
fn synthesize_apply_and_verify() {
    unsafe {
        let b = block("ADD R0 R1; LSL R0", 5);
        // Signed shift modes split off the wrapping doublings.
        assert_eq!(ws_block_set_lsl_signed(b, true), WsStatus::Ok);
        let mut tf = ptr::null_mut();
        assert_eq!(ws_synthesize(b, ptr::null(), &mut tf), WsStatus::Ok);
        let mut pairs = 0usize;
        assert_eq!(ws_tf_pair_count(tf, &mut pairs), WsStatus::Ok);
        assert_eq!(pairs, 8);

        let mut out = ptr::null_mut();
        assert_eq!(ws_tf_apply(tf, cstr("0 <= R0 <= 3, 0 <= R1 <= 3").as_ptr(), &mut out), WsStatus::Ok);
        let state = take(out);
        assert!(state.contains("r0 in [0, 12]"), "{state}");

        let mut report = ptr::null_mut();
        assert_eq!(ws_verify(tf, b, 100, 7, &mut report), WsStatus::Ok);
        assert!(take(report).contains("\"violations\": 0"));
        ws_tf_free(tf);
        ws_block_free(b);
    }
}

#[test]
fn serialize_round_trip() {
    unsafe {
        let b = block(".unsigned\nINC R0", 8);
        let mut opts = ws_synth_options_default();
        opts.domain = WsDomain::Interval;
        opts.strategy = WsStrategy::Const;
        let mut tf = ptr::null_mut();
        assert_eq!(ws_synthesize(b, &opts, &mut tf), WsStatus::Ok);
        for json in [true, false] {
            let mut s = ptr::null_mut();
            assert_eq!(ws_tf_serialize(tf, json, &mut s), WsStatus::Ok);
            let text = take(s);
            let mut back = ptr::null_mut();
            assert_eq!(ws_tf_parse(cstr(&text).as_ptr(), &mut back), WsStatus::Ok, "{}", last_error());
            let mut again = ptr::null_mut();
            assert_eq!(ws_tf_serialize(back, json, &mut again), WsStatus::Ok);
            assert_eq!(take(again), text);
            ws_tf_free(back);
        }
        ws_tf_free(tf);
        ws_block_free(b);
    }
}

#[test]
fn tampered_function_is_unsound() {
    unsafe {
        let b = block("EOR R0 R1; EOR R1 R0; EOR R0 R1", 4);
        let mut tf = ptr::null_mut();
        assert_eq!(ws_synthesize(b, ptr::null(), &mut tf), WsStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(ws_tf_serialize(tf, false, &mut s), WsStatus::Ok);
        let text = take(s);
        let at = text.find("update d'1 <= ").unwrap();
        let end = at + text[at..].find('\n').unwrap();
        let bad = format!("{}update d'1 <= -8{}", &text[..at], &text[end..]);
        let mut bad_tf = ptr::null_mut();
        assert_eq!(ws_tf_parse(cstr(&bad).as_ptr(), &mut bad_tf), WsStatus::Ok);
        assert_eq!(ws_verify(bad_tf, b, 50, 1, ptr::null_mut()), WsStatus::Unsound);
        ws_tf_free(bad_tf);
        ws_tf_free(tf);
        ws_block_free(b);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut b = ptr::null_mut();
        assert_eq!(ws_block_parse(cstr("FOO R0").as_ptr(), 0, &mut b), WsStatus::Parse);
        assert!(!last_error().is_empty());
        assert!(b.is_null());

        assert_eq!(ws_block_parse(ptr::null(), 0, &mut b), WsStatus::InvalidArgument);
        assert_eq!(ws_block_parse(cstr("INC R0").as_ptr(), 99, &mut b), WsStatus::InvalidArgument);
        assert_eq!(ws_block_parse(cstr("INC R0").as_ptr(), 4, ptr::null_mut()), WsStatus::InvalidArgument);

        let mut tf = ptr::null_mut();
        assert_eq!(ws_synthesize(ptr::null(), ptr::null(), &mut tf), WsStatus::InvalidArgument);
        assert_eq!(ws_tf_parse(cstr("not a transfer function").as_ptr(), &mut tf), WsStatus::Parse);

        // A success clears the message.
        let b = block("INC R0", 4);
        assert_eq!(last_error(), "");
        assert_eq!(ws_block_set_unsigned(b, true), WsStatus::Ok);
        assert_eq!(ws_block_set_lsl_signed(ptr::null_mut(), true), WsStatus::InvalidArgument);
        ws_block_free(b);
        ws_block_free(ptr::null_mut());
        ws_tf_free(ptr::null_mut());
        ws_string_free(ptr::null_mut());
    }
}

#[test]
fn budget_maps_to_resource_limit() {
    unsafe {
        let b = block("MUL R0 R2; ADD R0 R1", 16);
        let mut opts = ws_synth_options_default();
        opts.conflict_budget = 1;
        let mut tf = ptr::null_mut();
        assert_eq!(ws_synthesize(b, &opts, &mut tf), WsStatus::ResourceLimit);
        assert!(tf.is_null());
        ws_block_free(b);
    }
}

#[test]
fn header_declares_the_interface() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/wrapsynth.h")).unwrap();
    for name in [
        "WRAPSYNTH_H",
        "typedef struct WsBlock WsBlock",
        "WS_STATUS_RESOURCE_LIMIT",
        "ws_synthesize",
        "ws_tf_apply",
        "ws_verify",
        "ws_last_error",
        "ws_string_free",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}
