fn main() {
    std::process::exit(timeorder::cli::main_with_args(std::env::args_os()));
}
