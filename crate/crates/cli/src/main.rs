fn main() {
    std::process::exit(sublex_cli::run_cli(std::env::args_os()));
}
