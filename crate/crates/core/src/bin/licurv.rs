fn main() {
    std::process::exit(licurv::cli::dispatch(std::env::args_os()));
}
