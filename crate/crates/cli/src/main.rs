fn main() {
    std::process::exit(cpcsc_cli::run_cli(std::env::args_os()));
}
