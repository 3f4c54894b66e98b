fn main() {
    std::process::exit(semisim::harness::cli::run(std::env::args_os()));
}
