use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use cophy_ffi::*;

const PLANAR: &str = "#HOST\n((a,b)u,c)r;\n#PARASITE\n((x,y)q1,z)q0;\n#LEAFMAP\nx a\ny c\nz b\n#GAMMA g\nq1 r\nq0 r\n";

fn parse(text: &str) -> *mut CophyInstanceHandle {
    let c = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    let s = unsafe { cophy_instance_parse(c.as_ptr(), &mut inst) };
    assert_eq!(s, CophyStatus::Ok);
    assert!(!inst.is_null());
    inst
}

fn last_error() -> String {
    let p = cophy_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { cophy_string_free(s) };
    out
}

#[test]
fn parse_layout_and_emit() {
    let inst = parse(PLANAR);
    unsafe {
        let mut n = 0usize;
        assert_eq!(cophy_instance_gamma_count(inst, &mut n), CophyStatus::Ok);
        assert_eq!(n, 1);
        let mut planar = false;
        assert_eq!(cophy_instance_is_planar(inst, &mut planar), CophyStatus::Ok);
        assert!(planar);
        let mut valid = false;
        assert_eq!(cophy_validate(inst, 0, &mut valid), CophyStatus::Ok);
        assert!(valid);
        let mut tc = false;
        assert_eq!(cophy_time_consistent(inst, 0, &mut tc), CophyStatus::Ok);
        assert!(tc);

        let mut layout = ptr::null_mut();
        assert_eq!(
            cophy_layout(inst, 0, CophyAlgorithm::Planar, false, &mut layout),
            CophyStatus::Ok
        );
        let mut crossings = 99usize;
        assert_eq!(
            cophy_layout_crossings(layout, &mut crossings),
            CophyStatus::Ok
        );
        assert_eq!(crossings, 0);
        let mut json = ptr::null_mut();
        assert_eq!(cophy_layout_json(layout, &mut json), CophyStatus::Ok);
        let json = take(json);
        let doc = cophy::io::parse_json(&json).unwrap();
        assert_eq!(doc.crossing_count, 0);
        let mut svg = ptr::null_mut();
        let plain = CString::new("plain").unwrap();
        assert_eq!(
            cophy_layout_svg(layout, plain.as_ptr(), &mut svg),
            CophyStatus::Ok
        );
        assert!(take(svg).starts_with("<svg"));
        cophy_layout_free(layout);

        let mut min = 99usize;
        assert_eq!(
            cophy_oracle_min_crossings(inst, 0, 1_000_000, &mut min),
            CophyStatus::Ok
        );
        assert_eq!(min, 0);
        assert_eq!(
            cophy_oracle_min_crossings(inst, 0, 1, &mut min),
            CophyStatus::LimitExceeded
        );
        cophy_instance_free(inst);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut inst = ptr::null_mut();
        let bad = CString::new("#HOST\na;\n").unwrap();
        assert_eq!(
            cophy_instance_parse(bad.as_ptr(), &mut inst),
            CophyStatus::ParseError
        );
        assert!(last_error().contains("PARASITE"));
        assert_eq!(
            cophy_instance_parse(ptr::null(), &mut inst),
            CophyStatus::NullPointer
        );

        let inst = parse(PLANAR);
        let mut v = false;
        assert_eq!(cophy_validate(inst, 5, &mut v), CophyStatus::OutOfRange);
        // lca mapping through a negative index
        assert_eq!(cophy_validate(inst, -1, &mut v), CophyStatus::Ok);
        assert!(v);
        cophy_instance_free(inst);

        // non-planar instance refuses the planar construction
        let np = "#HOST\n((a,b)u,(c,d)v)r;\n#PARASITE\n((x,y)p,(z,w)q)s;\n#LEAFMAP\nx a\ny c\nz b\nw d\n";
        let inst = parse(np);
        let mut planar = true;
        assert_eq!(cophy_instance_is_planar(inst, &mut planar), CophyStatus::Ok);
        if !planar {
            let mut layout = ptr::null_mut();
            assert_eq!(
                cophy_layout(inst, -1, CophyAlgorithm::Planar, false, &mut layout),
                CophyStatus::NotPlanar
            );
            assert!(layout.is_null());
            assert_eq!(
                cophy_layout(inst, -1, CophyAlgorithm::Smp, false, &mut layout),
                CophyStatus::Ok
            );
            cophy_layout_free(layout);
        }
        cophy_instance_free(inst);
        cophy_instance_free(ptr::null_mut());
        cophy_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cophy_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(crate_dir().join("include/cophy.h")).unwrap();
    for f in [
        "cophy_instance_parse",
        "cophy_instance_free",
        "cophy_layout",
        "cophy_layout_json",
        "cophy_layout_svg",
        "cophy_last_error_message",
        "cophy_string_free",
        "typedef struct CophyInstance CophyInstance",
    ] {
        assert!(h.contains(f), "header lacks {f}");
    }
}

/// Compiles and runs a C client against the static library when a C
/// compiler is present.
#[test]
fn c_client_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let deps = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = [deps.join("libcophy_ffi.a"), deps.join("../libcophy_ffi.a")]
        .into_iter()
        .find(|p| p.exists());
    let tmp = std::env::temp_dir().join(format!("cophy-capi-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("client.c");
    std::fs::write(
        &src,
        r##"#include <stdio.h>
#include <string.h>
#include "cophy.h"

int main(void) {
    const char *text = "#HOST\n((a,b)u,c)r;\n#PARASITE\n((x,y)q1,z)q0;\n#LEAFMAP\nx a\ny c\nz b\n";
    CophyInstance *inst = NULL;
    if (cophy_instance_parse(text, &inst) != COPHY_STATUS_OK) return 2;
    CophyLayout *layout = NULL;
    if (cophy_layout(inst, -1, COPHY_ALGORITHM_PLANAR, false, &layout) != COPHY_STATUS_OK) return 3;
    size_t n = 7;
    cophy_layout_crossings(layout, &n);
    char *json = NULL;
    cophy_layout_json(layout, &json);
    int ok = n == 0 && json != NULL && strstr(json, "\"crossing_count\": 0") != NULL;
    cophy_string_free(json);
    cophy_layout_free(layout);
    cophy_instance_free(inst);
    printf("%s\n", ok ? "ok" : "bad");
    return ok ? 0 : 1;
}
"##,
    )
    .unwrap();
    let include = crate_dir().join("include");
    let syntax = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(syntax.success(), "header does not compile as C99");
    let Some(lib) = lib else {
        eprintln!("static library not found next to the test binary; link step skipped");
        return;
    };
    let exe = tmp.join("client");
    let status = Command::new("cc")
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "client exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
    std::fs::remove_dir_all(&tmp).ok();
}
