fn main() {
    if let Some(n) = std::env::var("MPP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    std::process::exit(mpp_core::cli::parse_and_dispatch(std::env::args_os()));
}
