fn main() {
    std::process::exit(efm_cli::run());
}
