fn main() {
    std::process::exit(mdl::cli::run_cli(std::env::args()));
}
