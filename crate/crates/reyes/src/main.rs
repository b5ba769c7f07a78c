fn main() {
    std::process::exit(reyes::cli::run());
}
