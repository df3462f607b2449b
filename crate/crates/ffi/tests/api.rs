use std::ffi::{c_char, CStr, CString};
use std::ptr;

use curveflow_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { cf_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { cf_string_free(p) };
    s
}

#[test]
fn circle_flow_round_trip_and_verify() {
    unsafe {
        let mut net = ptr::null_mut();
        assert_eq!(cf_network_circle(1.0, 64, 0.0, 0.0, &mut net), CfStatus::Ok);
        let mut len = 0.0;
        assert_eq!(cf_network_length(net, &mut len), CfStatus::Ok);
        let exact = 2.0 * 64.0 * (std::f64::consts::PI / 64.0).sin();
        assert!((len - exact).abs() < 1e-12);

        let mut u = ptr::null_mut();
        assert_eq!(cf_forcing_zero(&mut u), CfStatus::Ok);
        let opts = CString::new(r#"{"record_every": 20}"#).unwrap();
        let mut trace = ptr::null_mut();
        assert_eq!(cf_flow_run(net, u, 0.1, opts.as_ptr(), &mut trace), CfStatus::Ok);

        let mut count = 0;
        assert_eq!(cf_trace_snapshot_count(trace, &mut count), CfStatus::Ok);
        assert!(count >= 2);
        let mut last = [0.0; 4];
        assert_eq!(cf_trace_snapshot(trace, count - 1, last.as_mut_ptr()), CfStatus::Ok);
        assert_eq!(last[0], 0.1);
        // Circle of radius sqrt(1 - 2t).
        assert!((last[1] - 2.0 * std::f64::consts::PI * 0.8f64.sqrt()).abs() < 2e-2);
        let mut failed = -1;
        assert_eq!(cf_trace_failed(trace, &mut failed), CfStatus::Ok);
        assert_eq!(failed, 0);

        let mut text = ptr::null_mut();
        assert_eq!(cf_trace_to_jsonl(trace, &mut text), CfStatus::Ok);
        let jsonl = CString::new(take_string(text)).unwrap();
        let mut again = ptr::null_mut();
        assert_eq!(cf_trace_from_jsonl(jsonl.as_ptr(), &mut again), CfStatus::Ok);
        let mut count2 = 0;
        cf_trace_snapshot_count(again, &mut count2);
        assert_eq!(count, count2);

        let suite = CString::new("budgets").unwrap();
        let (mut report, mut pass) = (ptr::null_mut(), -1);
        assert_eq!(cf_verify(again, suite.as_ptr(), 1.0, &mut report, &mut pass), CfStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(report)).unwrap();
        assert!(report.as_array().unwrap().len() >= 4);
        assert_eq!(pass, 1);

        let mut fin = ptr::null_mut();
        assert_eq!(cf_trace_final_network(trace, &mut fin), CfStatus::Ok);
        let mut n = 0;
        cf_network_vertex_count(fin, &mut n);
        let mut xy = vec![0.0; 2 * n];
        assert_eq!(cf_network_vertices(fin, xy.as_mut_ptr(), xy.len()), CfStatus::Ok);
        let r = (xy[0] * xy[0] + xy[1] * xy[1]).sqrt();
        assert!((r - 0.8f64.sqrt()).abs() < 1e-2);
        assert_eq!(cf_network_vertices(fin, xy.as_mut_ptr(), 1), CfStatus::InvalidArgument);

        cf_network_free(fin);
        cf_trace_free(again);
        cf_trace_free(trace);
        cf_forcing_free(u);
        cf_network_free(net);
    }
}

#[test]
fn null_pointers_are_reported() {
    unsafe {
        assert_eq!(cf_network_circle(1.0, 16, 0.0, 0.0, ptr::null_mut()), CfStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut out = 0.0;
        assert_eq!(cf_network_length(ptr::null(), &mut out), CfStatus::NullPointer);
        cf_network_free(ptr::null_mut());
        cf_trace_free(ptr::null_mut());
        cf_forcing_free(ptr::null_mut());
        cf_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut net = ptr::null_mut();
        assert_eq!(cf_network_circle(-1.0, 16, 0.0, 0.0, &mut net), CfStatus::InvalidArgument);
        let junk = CString::new("{not json").unwrap();
        assert_eq!(cf_network_from_json(junk.as_ptr(), &mut net), CfStatus::Parse);
        let mut u = ptr::null_mut();
        assert_eq!(cf_forcing_from_json(junk.as_ptr(), &mut u), CfStatus::Parse);
        let swirl = CString::new(r#"{"kind": "gaussian-swirl", "amplitude": 1.0, "width": 0.3}"#).unwrap();
        assert_eq!(cf_forcing_from_json(swirl.as_ptr(), &mut u), CfStatus::Ok);
        let mut um = ptr::null_mut();
        assert_eq!(cf_forcing_mollify(u, 0, &mut um), CfStatus::InvalidArgument);
        assert!(last_error().contains("m must be at least 1"));
        assert_eq!(cf_forcing_mollify(u, 8, &mut um), CfStatus::Ok);
        let mut uv = [0.0; 2];
        assert_eq!(cf_forcing_value(um, 0.2, 0.1, 0.5, uv.as_mut_ptr()), CfStatus::Ok);
        let mut exact = [0.0; 2];
        cf_forcing_value(u, 0.2, 0.1, 0.5, exact.as_mut_ptr());
        assert!((uv[0] - exact[0]).abs() + (uv[1] - exact[1]).abs() < 0.1);
        cf_forcing_free(um);

        let mut tri = ptr::null_mut();
        assert_eq!(cf_network_triod(1.0, 8, &mut tri), CfStatus::Ok);
        let mut trace = ptr::null_mut();
        assert_eq!(cf_flow_run(tri, u, -1.0, ptr::null(), &mut trace), CfStatus::InvalidArgument);
        let bad_opts = CString::new(r#"{"record_every": "often"}"#).unwrap();
        assert_eq!(cf_flow_run(tri, u, 0.1, bad_opts.as_ptr(), &mut trace), CfStatus::Parse);
        let empty = CString::new("").unwrap();
        assert_eq!(cf_trace_from_jsonl(empty.as_ptr(), &mut trace), CfStatus::Parse);
        cf_network_free(tri);
        cf_forcing_free(u);
    }
}

#[test]
fn network_json_round_trip() {
    unsafe {
        let mut tri = ptr::null_mut();
        cf_network_triod(1.0, 4, &mut tri);
        let mut text = ptr::null_mut();
        assert_eq!(cf_network_to_json(tri, &mut text), CfStatus::Ok);
        let json = CString::new(take_string(text)).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(cf_network_from_json(json.as_ptr(), &mut back), CfStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        cf_network_length(tri, &mut a);
        cf_network_length(back, &mut b);
        assert_eq!(a, b);
        assert!((a - 3.0).abs() < 1e-12);
        cf_network_free(tri);
        cf_network_free(back);
    }
}

#[test]
fn dyadic_parameters() {
    let (mut c2, mut p, mut dt) = (0u32, 0i64, 0.0);
    unsafe {
        assert_eq!(cf_dyadic_step_params(0.5, 1, &mut c2, &mut p, &mut dt), CfStatus::Ok);
        assert_eq!((c2, p, dt), (23, 23, 2f64.powi(-23)));
        assert_eq!(cf_dyadic_step_params(1.5, 1, &mut c2, &mut p, &mut dt), CfStatus::InvalidArgument);
        let v = CStr::from_ptr(cf_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
