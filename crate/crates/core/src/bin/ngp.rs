fn main() {
    std::process::exit(ngp::cli::main_with_args(std::env::args_os()));
}
