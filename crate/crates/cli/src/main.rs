fn main() {
    std::process::exit(orka_cli::cli_main(std::env::args().collect()));
}
