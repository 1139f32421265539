use std::ffi::{CStr, CString};
use std::ptr;

use ccsp_ffi::*;

const C4: &str = "kind maxcut-bisection\n0 1\n1 2\n2 3\n3 0\n";

fn instance(text: &str) -> *mut CcspInstance {
    let t = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { ccsp_instance_from_edge_list(t.as_ptr(), &mut inst) }, CcspStatus::Ok);
    inst
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ccsp_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn solve_round_and_free() {
    let inst = instance(C4);
    assert_eq!(unsafe { ccsp_instance_num_variables(inst) }, 4);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { ccsp_solve(inst, 2, 0, 0.0, &mut sol) }, CcspStatus::Ok);
    let mut obj = 0.0;
    assert_eq!(unsafe { ccsp_solution_objective(sol, &mut obj) }, CcspStatus::Ok);
    assert!((obj - 1.0).abs() < 1e-4);

    let mut spins = [0i8; 4];
    let (mut value, mut balance) = (0.0, 1.0);
    let st = unsafe { ccsp_round(inst, sol, 8, 5, spins.as_mut_ptr(), 4, &mut value, &mut balance) };
    assert_eq!(st, CcspStatus::Ok);
    assert_eq!(value, 1.0);
    assert_eq!(balance, 0.0);
    assert!(spins.iter().all(|&s| s == 1 || s == -1));

    let labels: Vec<u8> = spins.iter().map(|&s| u8::from(s < 0)).collect();
    let mut eval = 0.0;
    assert_eq!(unsafe { ccsp_instance_evaluate(inst, labels.as_ptr(), 4, &mut eval) }, CcspStatus::Ok);
    assert_eq!(eval, value);

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { ccsp_solution_to_json(sol, &mut json) }, CcspStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { ccsp_solution_from_json(json, &mut back) }, CcspStatus::Ok);
    let mut obj2 = 0.0;
    unsafe { ccsp_solution_objective(back, &mut obj2) };
    assert_eq!(obj, obj2);
    unsafe {
        ccsp_string_free(json);
        ccsp_solution_free(back);
        ccsp_solution_free(sol);
        ccsp_instance_free(inst);
    }
}

#[test]
fn error_codes_and_messages() {
    let bad = CString::new("0 x\n").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { ccsp_instance_from_edge_list(bad.as_ptr(), &mut inst) }, CcspStatus::Parse);
    assert!(inst.is_null());
    assert!(last_error().contains("line 1"));

    assert_eq!(unsafe { ccsp_instance_from_edge_list(ptr::null(), &mut inst) }, CcspStatus::NullPointer);
    assert!(last_error().contains("null pointer"));

    let cycle: String = (0..20).map(|i| format!("{} {}\n", i, (i + 1) % 20)).collect();
    let inst = instance(&cycle);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { ccsp_solve(inst, 9, 0, 0.0, &mut sol) }, CcspStatus::Capacity);
    assert!(sol.is_null());

    let mut w = [0u8; 4];
    let mut v = 0.0;
    let st = unsafe { ccsp_brute_force(inst, true, w.as_mut_ptr(), w.len(), &mut v) };
    assert_eq!(st, CcspStatus::InvalidArgument);
    unsafe { ccsp_instance_free(inst) };
    unsafe { ccsp_instance_free(ptr::null_mut()) };
    assert_eq!(unsafe { ccsp_instance_num_variables(ptr::null()) }, 0);
}

#[test]
fn brute_force_k4() {
    let inst = instance("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n");
    let mut w = [9u8; 4];
    let mut v = 0.0;
    assert_eq!(unsafe { ccsp_brute_force(inst, true, w.as_mut_ptr(), 4, &mut v) }, CcspStatus::Ok);
    assert!((v - 4.0 / 6.0).abs() < 1e-12);
    assert_eq!(w.iter().map(|&x| x as usize).sum::<usize>(), 2);
    unsafe { ccsp_instance_free(inst) };
}

#[test]
fn scalar_kernels() {
    assert!((ccsp_bvn_cdf(0.0, 0.0, 0.5) - (0.25 + 0.5f64.asin() / (2.0 * std::f64::consts::PI))).abs() < 1e-12);
    assert!((ccsp_separation_prob(0.0, 0.0, -1.0) - 1.0).abs() < 1e-12);
    assert!(ccsp_separation_prob(0.0, 0.0, 1.5).is_nan());
    assert_eq!(ccsp_threshold(0.0), 0.0);
    assert!((ccsp_threshold(0.3) + ccsp_threshold(-0.3)).abs() < 1e-15);
    assert!(ccsp_threshold(2.0).is_nan());
}
