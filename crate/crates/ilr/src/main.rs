fn main() {
    std::process::exit(ilr::cli::run(std::env::args().collect()));
}
