fn main() {
    std::process::exit(padic_linear::cli::main_with_args(std::env::args_os()));
}
