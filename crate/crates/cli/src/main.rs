fn main() {
    std::process::exit(comir_diag_cli::run(std::env::args_os()));
}
