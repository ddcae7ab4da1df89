use std::ffi::{CStr, CString};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sweatkit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = sweat_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

const SPACE1: &str =
    "6 3\nt1 1 0.1 0\nt2 0.9 0 0.2\npa 1 0 0\npb 0.95 0.05 0\nna 0 1 0\nnb 0.05 0.95 0\n";
const SPACE2: &str =
    "6 3\nt1 0 1 0.1\nt2 0.1 0.9 0.1\npa 1 0 0\npb 0.95 0.05 0\nna 0 1 0\nnb 0.05 0.95 0\n";

fn load(dir: &Path, name: &str, body: &str) -> *mut SweatSpace {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    let mut out = ptr::null_mut();
    let status = unsafe {
        sweat_space_load(
            c(path.to_str().unwrap()).as_ptr(),
            c(name).as_ptr(),
            &mut out,
        )
    };
    assert_eq!(status, SweatStatus::Ok);
    out
}

#[test]
fn load_query_and_free() {
    let dir = tempfile::tempdir().unwrap();
    let s = load(dir.path(), "one", SPACE1);
    unsafe {
        assert_eq!(sweat_space_dimension(s), 3);
        assert_eq!(sweat_space_len(s), 6);
        let mut cos = 0.0;
        assert_eq!(
            sweat_space_cosine(s, c("pa").as_ptr(), c("na").as_ptr(), &mut cos),
            SweatStatus::Ok
        );
        assert_eq!(cos, 0.0);
        assert!(sweat_last_error_message().is_null());
        assert_eq!(
            sweat_space_cosine(s, c("pa").as_ptr(), c("zz").as_ptr(), &mut cos),
            SweatStatus::Data
        );
        assert!(last_error().contains("zz"));
        sweat_space_free(s);
        sweat_space_free(ptr::null_mut());
        assert_eq!(sweat_space_len(ptr::null()), 0);
    }
}

#[test]
fn status_codes_follow_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        let missing = dir.path().join("absent.vec");
        assert_eq!(
            sweat_space_load(
                c(missing.to_str().unwrap()).as_ptr(),
                c("x").as_ptr(),
                &mut out
            ),
            SweatStatus::Io
        );
        fs::write(dir.path().join("bad.vec"), "2 3\na 1 2\n").unwrap();
        let bad = dir.path().join("bad.vec");
        assert_eq!(
            sweat_space_load(c(bad.to_str().unwrap()).as_ptr(), c("x").as_ptr(), &mut out),
            SweatStatus::Data
        );
        assert!(last_error().contains("bad.vec:2:"), "{}", last_error());
        assert_eq!(
            sweat_space_load(ptr::null(), c("x").as_ptr(), &mut out),
            SweatStatus::NullPointer
        );
        let not_utf8 = [0xffu8, 0];
        assert_eq!(
            sweat_space_load(not_utf8.as_ptr().cast(), c("x").as_ptr(), &mut out),
            SweatStatus::InvalidUtf8
        );
        assert!(out.is_null());
        let mut z = 0.0;
        assert_eq!(sweat_zipf(100_000, 1_000_000_000, &mut z), SweatStatus::Ok);
        assert_eq!(z, 5.0);
        assert_eq!(sweat_zipf(0, 10, &mut z), SweatStatus::Data);
    }
}

#[test]
fn run_returns_summary_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let (s1, s2) = (
        load(dir.path(), "E1", SPACE1),
        load(dir.path(), "E2", SPACE2),
    );
    let request = c(r#"{
        "topic": {"label": "t", "words": ["t1", "t2"]},
        "poles": {"label_a": "pos", "words_a": ["pa", "pb"], "label_b": "neg", "words_b": ["na", "nb"]},
        "permutations": {"mode": "exact"}
    }"#);
    let mut summary = SweatSummary::default();
    let mut json = ptr::null_mut();
    unsafe {
        assert_eq!(
            sweat_run(s1, s2, request.as_ptr(), &mut summary, &mut json),
            SweatStatus::Ok,
            "{}",
            last_error()
        );
        assert!(summary.score > 0.0);
        assert_eq!(summary.n_permutations, 6);
        assert_eq!(summary.exact, 1);
        let text = CStr::from_ptr(json).to_str().unwrap().to_string();
        sweat_string_free(json);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["score"].as_f64().unwrap(), summary.score);
        assert_eq!(value["associations"][0], "E1 ~ pos");

        let bad = c(r#"{"topic": {"label": "t", "words": []}, "poles": {}}"#);
        assert_eq!(
            sweat_run(s1, s2, bad.as_ptr(), &mut summary, ptr::null_mut()),
            SweatStatus::Validation
        );
        sweat_space_free(s1);
        sweat_space_free(s2);
    }
}

#[test]
fn align_recovers_swapped_axes() {
    let dir = tempfile::tempdir().unwrap();
    let src = load(dir.path(), "src", "3 2\na 1 0\nb 0 1\nc 1 1\n");
    let tgt = load(dir.path(), "tgt", "3 2\na 0 1\nb 1 0\nc 1 1\n");
    let words = [c("a"), c("b"), c("c")];
    let ptrs: Vec<_> = words.iter().map(|w| w.as_ptr()).collect();
    let mut aligned = ptr::null_mut();
    let mut residual = -1.0;
    unsafe {
        let status = sweat_align(
            src,
            tgt,
            ptrs.as_ptr(),
            ptrs.len(),
            false,
            &mut aligned,
            &mut residual,
        );
        assert_eq!(status, SweatStatus::Ok, "{}", last_error());
        assert!(residual < 1e-20);
        let mut cos = 0.0;
        assert_eq!(
            sweat_space_cosine(aligned, c("a").as_ptr(), c("c").as_ptr(), &mut cos),
            SweatStatus::Ok
        );
        assert!((cos - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            sweat_align(
                src,
                tgt,
                ptrs.as_ptr(),
                0,
                true,
                &mut aligned,
                &mut residual
            ),
            SweatStatus::Data
        );
        for s in [src, tgt, aligned] {
            sweat_space_free(s);
        }
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(sweat_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sweatkit.h")).unwrap()
}

#[test]
fn header_declares_the_whole_surface() {
    let h = header();
    for item in [
        "typedef struct SweatSpace SweatSpace;",
        "SWEAT_STATUS_OK = 0",
        "SWEAT_STATUS_PANIC = 6",
        "typedef struct SweatSummary",
        "sweat_last_error_message(void)",
        "sweat_space_load(const char *path",
        "sweat_space_free(struct SweatSpace *space)",
        "sweat_run(const struct SweatSpace *space1",
        "sweat_align(",
        "sweat_run_config(",
        "sweat_string_free(char *s)",
        "sweat_zipf(uint64_t count",
    ] {
        assert!(h.contains(item), "header lacks {item}");
    }
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s1.vec"), SPACE1).unwrap();
    fs::write(dir.path().join("s2.vec"), SPACE2).unwrap();
    let program = r#"
#include <stdio.h>
#include "sweatkit.h"
int main(int argc, char **argv) {
    SweatSpace *a = NULL, *b = NULL;
    if (sweat_space_load(argv[1], "E1", &a) != SWEAT_STATUS_OK) return 10;
    if (sweat_space_load(argv[2], "E2", &b) != SWEAT_STATUS_OK) return 11;
    SweatSummary s;
    const char *req = "{\"topic\":{\"label\":\"t\",\"words\":[\"t1\",\"t2\"]},"
        "\"poles\":{\"label_a\":\"p\",\"words_a\":[\"pa\",\"pb\"],\"label_b\":\"n\",\"words_b\":[\"na\",\"nb\"]}}";
    if (sweat_run(a, b, req, &s, NULL) != SWEAT_STATUS_OK) return 12;
    if (sweat_space_load("/nonexistent/x.vec", "x", &a) != SWEAT_STATUS_IO) return 13;
    if (sweat_last_error_message() == NULL) return 14;
    printf("%.6f %llu\n", s.score, (unsigned long long)s.n_permutations);
    sweat_space_free(a);
    sweat_space_free(b);
    return 0;
}
"#;
    let src = dir.path().join("main.c");
    fs::write(&src, program).unwrap();
    let exe = dir.path().join("main");
    let lib = target_dir().join("libsweatkit_ffi.a");
    assert!(
        lib.exists(),
        "static library not built at {}",
        lib.display()
    );
    let status = Command::new("cc")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(Path::new(env!("CARGO_MANIFEST_DIR")).join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe)
        .arg(dir.path().join("s1.vec"))
        .arg(dir.path().join("s2.vec"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = text.split_whitespace().collect();
    assert!(fields[0].parse::<f64>().unwrap() > 0.0);
    assert_eq!(fields[1], "6");
}
