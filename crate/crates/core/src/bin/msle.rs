fn main() {
    std::process::exit(msle::harness::cli::run(std::env::args_os()));
}
