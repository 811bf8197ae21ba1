fn main() {
    let dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    println!("cargo:rerun-if-changed=src/lib.rs");
    let base = cbindgen::Config { language: cbindgen::Language::C, include_guard: Some("HAARLM_H".into()), cpp_compat: true, ..Default::default() };
    let mut cfg = base;
    cfg.enumeration.rename_variants = cbindgen::RenameRule::QualifiedScreamingSnakeCase;
    cbindgen::Builder::new()
        .with_crate(&dir)
        .with_config(cfg)
        .generate()
        .expect("cbindgen failed")
        .write_to_file(format!("{dir}/include/haarlm.h"));
}
