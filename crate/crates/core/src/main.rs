fn main() {
    std::process::exit(spectral_corners::cli::run(std::env::args_os()));
}
