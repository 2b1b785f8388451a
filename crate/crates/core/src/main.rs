fn main() {
    std::process::exit(sparse2stage::cli::run());
}
