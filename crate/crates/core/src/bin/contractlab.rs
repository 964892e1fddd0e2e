fn main() {
    std::process::exit(contractlab::cli::main_with_args(std::env::args_os()));
}
