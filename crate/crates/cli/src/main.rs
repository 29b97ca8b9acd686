fn main() {
    std::process::exit(qlaw_cli::run(std::env::args_os()));
}
