fn main() {
    std::process::exit(enslab::cli::main());
}
