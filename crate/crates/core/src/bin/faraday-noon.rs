fn main() {
    std::process::exit(faraday_noon::cli::run(std::env::args_os()));
}
