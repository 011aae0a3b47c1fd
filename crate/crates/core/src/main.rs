fn main() {
    std::process::exit(pairsim::cli::run(std::env::args_os()));
}
