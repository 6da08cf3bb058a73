fn main() {
    std::process::exit(excir::cli::cli_main(std::env::args_os()));
}
