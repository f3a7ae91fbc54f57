fn main() {
    std::process::exit(ctfbp::harness::cli::run(std::env::args_os()));
}
