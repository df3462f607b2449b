//! Compiles a C program against the generated header and links it to the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "curveflow.h"

int main(void) {
    CfNetwork *net = NULL;
    CfForcing *u = NULL;
    CfTrace *trace = NULL;
    if (cf_network_circle(1.0, 64, 0.0, 0.0, &net) != CF_STATUS_OK) return 1;
    if (cf_forcing_zero(&u) != CF_STATUS_OK) return 2;
    if (cf_flow_run(net, u, 0.05, "{\"record_every\": 50}", &trace) != CF_STATUS_OK) return 3;
    size_t n = 0;
    cf_trace_snapshot_count(trace, &n);
    double last[4];
    if (cf_trace_snapshot(trace, n - 1, last) != CF_STATUS_OK) return 4;
    if (fabs(last[1] - 2.0 * M_PI * sqrt(0.9)) > 2e-2) return 5;
    if (cf_network_length(NULL, last) != CF_STATUS_NULL_POINTER) return 6;
    char msg[128];
    if (cf_last_error(msg, sizeof msg) == 0 || strstr(msg, "null") == NULL) return 7;
    uint32_t c2; int64_t p; double dt;
    if (cf_dyadic_step_params(0.5, 1, &c2, &p, &dt) != CF_STATUS_OK || c2 != 23 || p != 23) return 8;
    cf_trace_free(trace);
    cf_forcing_free(u);
    cf_network_free(net);
    printf("ok\n");
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().expect("test path");
    let target = exe.parent().and_then(|d| d.parent()).expect("target dir").to_path_buf();
    // `cargo test` does not refresh the static library; build it explicitly.
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let mut build = Command::new(cargo);
    build
        .args(["build", "--quiet", "-p", "curveflow-ffi", "--lib", "--target-dir"])
        .arg(target.parent().expect("target root"));
    if target.file_name().is_some_and(|n| n == "release") {
        build.arg("--release");
    }
    let built = build.current_dir(&crate_dir).status().expect("cargo available");
    assert!(built.success(), "building the static library failed");
    let lib = target.join("libcurveflow_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().expect("tempdir");
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).expect("write source");
    let bin = dir.path().join("main");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c11")
        .arg("-D_DEFAULT_SOURCE")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().expect("run C program");
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
