fn main() {
    std::process::exit(sgwave_cli::run(std::env::args_os()));
}
