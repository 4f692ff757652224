fn main() {
    std::process::exit(quantdemod::cli::run());
}
