fn main() {
    std::process::exit(ader1d::cli::main_with_args(std::env::args_os()));
}
