fn main() {
    std::process::exit(ecorbits::cli::main());
}
