fn main() {
    std::process::exit(rfde::cli::main_with_args(std::env::args_os()));
}
