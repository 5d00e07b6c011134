fn main() {
    std::process::exit(floquet_lab::cli::main_with_args(std::env::args_os()));
}
