fn main() {
    std::process::exit(vetra_cli::run(std::env::args_os()));
}
