fn main() {
    std::process::exit(egqel::cli::main());
}
