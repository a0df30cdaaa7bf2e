fn main() {
    std::process::exit(rmerton_cli::run(std::env::args_os()));
}
