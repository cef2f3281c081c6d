fn main() {
    std::process::exit(lamlab_cli::run(std::env::args_os()));
}
