//! Compiles a small C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "plexdyn.h"

int main(void) {
    PlexdynStack *stack = NULL;
    if (plexdyn_stack_preset("bare-paper", &stack) != PLEXDYN_STATUS_OK) return 10;
    double f = 0.0;
    if (plexdyn_purcell_factor(stack, 23.0, 3.75, 60, &f) != PLEXDYN_STATUS_OK) return 11;
    printf("%s %.1f\n", plexdyn_version(), f);
    plexdyn_stack_free(stack);

    PlexdynStatus s = plexdyn_stack_bare(3.7, 8.55, 0.065, 0.0, 1.69, &stack);
    if (s != PLEXDYN_STATUS_INVALID_ARGUMENT || plexdyn_last_error() == NULL) return 12;
    return fabs(f - 1717.0) / 1717.0 < 0.02 ? 0 : 13;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.join("libplexdyn_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::TempDir::new().unwrap();
    let src = dir.path().join("client.c");
    let exe = dir.path().join("client");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .status()
        .expect("C compiler available");
    assert!(status.success(), "C client failed to build");
    let out = Command::new(&exe).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "client output: {text}");
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")));
}
