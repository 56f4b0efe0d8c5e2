fn main() {
    std::process::exit(gcsieve::scenarios::cli::run_cli(std::env::args_os()));
}
