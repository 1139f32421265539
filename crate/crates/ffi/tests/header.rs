use std::path::Path;
use std::process::Command;

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ccsp.h")).unwrap()
}

#[test]
fn header_declares_the_abi() {
    let h = header();
    for name in [
        "typedef struct CcspInstance CcspInstance;",
        "typedef struct CcspSolution CcspSolution;",
        "CCSP_STATUS_OK = 0",
        "CCSP_STATUS_CAPACITY = 4",
        "const char *ccsp_last_error(void);",
        "ccsp_instance_from_edge_list(",
        "ccsp_instance_from_json(",
        "ccsp_instance_free(",
        "ccsp_instance_num_variables(",
        "ccsp_instance_evaluate(",
        "ccsp_solve(",
        "ccsp_solution_objective(",
        "ccsp_solution_to_json(",
        "ccsp_solution_from_json(",
        "ccsp_solution_free(",
        "ccsp_string_free(",
        "ccsp_round(",
        "ccsp_brute_force(",
        "double ccsp_bvn_cdf(double t1, double t2, double rho);",
        "ccsp_separation_prob(",
        "ccsp_threshold(",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(_) = Command::new("cc").arg("--version").output() else {
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(
        &src,
        "#include \"ccsp.h\"\nint main(void) { CcspInstance *i = 0; return (int)ccsp_instance_num_variables(i); }\n",
    )
    .unwrap();
    let inc = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let o = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&inc)
        .arg(&src)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
