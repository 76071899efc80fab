fn main() {
    std::process::exit(kvadeig::cli::main_with_args(std::env::args_os()));
}
