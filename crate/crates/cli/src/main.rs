fn main() {
    std::process::exit(exobounds_cli::run(std::env::args_os()));
}
