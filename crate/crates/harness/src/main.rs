fn main() {
    std::process::exit(graphon_harness::cli::run(std::env::args_os()));
}
