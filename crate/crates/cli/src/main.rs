fn main() {
    std::process::exit(pebblemark_cli::run(std::env::args().collect()));
}
