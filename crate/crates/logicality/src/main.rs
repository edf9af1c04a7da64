fn main() {
    std::process::exit(logicality::cli::main_with_args(std::env::args_os()));
}
