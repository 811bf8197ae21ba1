use haarlm_ffi::*;
use std::ffi::CString;
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { hlm_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn coefficient_identity_through_the_abi() {
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(hlm_kernels_default(&mut k), HlmStatus::Ok);
        let (mut c0, mut a, mut b) = (0.0, 0.0, 0.0);
        assert_eq!(hlm_kernels_calibration(k, &mut c0, &mut a, &mut b), HlmStatus::Ok);
        assert!(c0 >= 1.0 && a >= 0.25 && b <= 0.75 && a < b);
        // <h_{k,mu}, eta_{k+N, nu_N(mu)}> = -2^{1-N-k}
        let (kk, n, mu) = (3i64, 2i64, 5i64);
        let nu = (1 << n) * mu + (1 << (n - 1));
        let mut c = 0.0;
        assert_eq!(hlm_haar_coefficient(k, kk, mu, kk + n, nu, &mut c), HlmStatus::Ok);
        assert_eq!(c, -(2f64).powi((1 - n - kk) as i32));
        hlm_kernels_free(k);
    }
}

#[test]
fn diagonal_through_the_abi() {
    unsafe {
        let mut k = ptr::null_mut();
        let mut cfg = ptr::null_mut();
        assert_eq!(hlm_kernels_default(&mut k), HlmStatus::Ok);
        assert_eq!(hlm_config_new(4.0, 1.2, -0.5, 8, &mut cfg), HlmStatus::Ok);
        let (mut d6, mut d7, mut lo) = (0.0, 0.0, 0.0);
        assert_eq!(hlm_diagonal(cfg, k, 6, &mut d6, &mut lo), HlmStatus::Ok);
        assert!(d6 >= lo && lo > 0.0);
        assert_eq!(hlm_diagonal(cfg, k, 7, &mut d7, &mut lo), HlmStatus::Ok);
        let slope = (d7 / d6).log2();
        assert!((slope - 1.0 / 3.0).abs() < 0.01, "{slope}");
        hlm_config_free(cfg);
        hlm_kernels_free(k);
    }
}

#[test]
fn errors_map_to_codes() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(hlm_config_new(0.5, 1.2, -0.5, 8, &mut cfg), HlmStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(hlm_kernels_default(ptr::null_mut()), HlmStatus::NullPointer);
        let mut k = ptr::null_mut();
        let path = CString::new("/nonexistent/kernels.txt").unwrap();
        assert_eq!(hlm_kernels_load(path.as_ptr(), &mut k), HlmStatus::Io);
        assert!(k.is_null());
        hlm_kernels_free(ptr::null_mut());
        hlm_config_free(ptr::null_mut());
    }
}

#[test]
fn header_is_generated_and_compiles() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = std::fs::read_to_string(format!("{dir}/include/haarlm.h")).unwrap();
    for name in ["hlm_kernels_default", "hlm_diagonal", "hlm_offdiagonal", "hlm_last_error", "HLM_STATUS_ASSERT_FAIL", "typedef struct HlmKernels HlmKernels"] {
        assert!(header.contains(name), "{name} missing");
    }
    let Ok(out) = std::process::Command::new("cc").arg("--version").output() else { return };
    if !out.status.success() {
        return;
    }
    let src = std::env::temp_dir().join("haarlm_header_check.c");
    std::fs::write(&src, "#include \"haarlm.h\"\nint main(void) { HlmKernels *k = 0; HlmStatus s = hlm_kernels_default(&k); hlm_kernels_free(k); return s == HLM_STATUS_OK ? 0 : 1; }\n").unwrap();
    let st = std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-I"]).arg(format!("{dir}/include")).arg(&src).status().unwrap();
    assert!(st.success());
}
