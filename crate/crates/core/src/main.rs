fn main() {
    std::process::exit(ionsel::cli::main())
}
