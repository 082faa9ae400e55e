fn main() {
    std::process::exit(hwgail::cli::run_cli(std::env::args_os()));
}
