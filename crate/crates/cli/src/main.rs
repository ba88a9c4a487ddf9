fn main() {
    std::process::exit(hartogs_cli::run(std::env::args_os()));
}
