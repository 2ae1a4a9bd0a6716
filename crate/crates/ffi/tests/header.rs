//! The generated header must compile as C and declare every export.

use std::path::PathBuf;
use std::process::Command;

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("edm_locate.h")
}

#[test]
fn declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    for ty in ["typedef struct LocInstance LocInstance;", "LOC_STATUS_OK = 0", "typedef struct LocSummary"] {
        assert!(text.contains(ty), "{ty}");
    }
}

#[test]
fn compiles_as_c99() {
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(
        &main,
        "#include \"edm_locate.h\"\n\
         int main(void) {\n\
           LocSolverConfig cfg = loc_solver_config_default(2);\n\
           LocInstance *inst = 0;\n\
           LocStatus s = loc_instance_new(0, 0, 2, 0, 0, &inst);\n\
           return (s == LOC_STATUS_OK) + (int)cfg.rank;\n\
         }\n",
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&main)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
}

#[test]
fn c_program_links_and_solves() {
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libedm_locate_ffi.a");
    assert!(lib.exists(), "static library at {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("solve.c");
    std::fs::write(
        &main,
        r#"#include <math.h>
#include <stdio.h>
#include "edm_locate.h"
int main(void) {
  const double anchors[10] = {6, 4, 0, -10, 5, -3, 1, -4, 3, -3};
  const double ranges[5] = {sqrt(65.0), sqrt(173.0), sqrt(85.0), sqrt(58.0), sqrt(61.0)};
  LocInstance *inst = NULL;
  LocSolution *sol = NULL;
  double x[2];
  char msg[128];
  if (loc_instance_new(anchors, 5, 2, ranges, NULL, &inst) != LOC_STATUS_OK) return 1;
  if (loc_solve(inst, NULL, &sol) != LOC_STATUS_OK) return 2;
  if (loc_solution_source(sol, x, 2) != LOC_STATUS_OK) return 3;
  if (loc_solution_source(sol, x, 1) != LOC_STATUS_BUFFER_TOO_SMALL) return 4;
  if (loc_last_error_message(msg, sizeof msg) == 0) return 5;
  printf("%.9f %.9f\n", x[0], x[1]);
  loc_solution_free(sol);
  loc_instance_free(inst);
  return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("solve");
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new(std::env::var("CC").unwrap_or_else(|_| "cc".into()))
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&main)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let xs: Vec<f64> = text.split_whitespace().map(|v| v.parse().unwrap()).collect();
    assert!((xs[0] + 2.0).abs() < 1e-6 && (xs[1] - 3.0).abs() < 1e-6, "{text}");
}
