fn main() {
    std::process::exit(structrank::cli::run());
}
