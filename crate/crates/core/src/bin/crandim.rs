fn main() {
    std::process::exit(crandim::cli::main());
}
