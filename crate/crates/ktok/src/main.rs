fn main() {
    std::process::exit(ktok::cli::run_cli(std::env::args_os()));
}
