fn main() {
    std::process::exit(gridrescue::cli::main());
}
