fn main() {
    std::process::exit(covcut::cli::main_with_args(std::env::args_os()));
}
