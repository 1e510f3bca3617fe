fn main() {
    std::process::exit(econoswap::cli::main_with_args(std::env::args_os()));
}
