fn main() {
    // Provider for the lapack-sys bindings. pkg-config emits the search
    // path and link directive when the .pc file is present; otherwise fall
    // back to the plain system library name.
    if pkg_config::probe_library("openblas").is_err() {
        println!("cargo:rustc-link-lib=openblas");
    }
}
