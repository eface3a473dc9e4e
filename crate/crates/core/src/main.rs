fn main() {
    std::process::exit(subchan::cli::main_with_args(std::env::args_os()));
}
