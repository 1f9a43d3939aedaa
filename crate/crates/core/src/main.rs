fn main() {
    std::process::exit(weakmodel::cli::main_with_args(std::env::args_os()));
}
