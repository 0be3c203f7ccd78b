fn main() {
    std::process::exit(complexity_perception::cli::main());
}
