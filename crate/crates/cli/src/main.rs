fn main() {
    std::process::exit(esqkd_cli::run_command(std::env::args_os()));
}
