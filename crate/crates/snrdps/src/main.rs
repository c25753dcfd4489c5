fn main() {
    std::process::exit(snrdps::cli::run_from(std::env::args_os()));
}
