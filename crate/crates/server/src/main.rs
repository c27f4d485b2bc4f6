fn main() {
    std::process::exit(sashimi::cli::run(std::env::args_os()));
}
