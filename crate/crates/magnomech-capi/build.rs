use std::env;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");

    let crate_dir = env::var("CARGO_MANIFEST_DIR").unwrap();

    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.include_guard = Some("MAGNOMECH_H".to_owned());
    config.documentation = true;
    config.enumeration.prefix_with_name = true;
    config.header = Some("/* C interface to the magnomech simulator. */".to_owned());

    cbindgen::Builder::new()
        .with_config(config)
        .with_crate(crate_dir)
        .generate()
        .expect("Unable to generate bindings")
        .write_to_file("include/magnomech.h");
}
