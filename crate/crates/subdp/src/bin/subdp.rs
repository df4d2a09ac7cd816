fn main() {
    std::process::exit(subdp::cli::run());
}
