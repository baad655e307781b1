fn main() {
    std::process::exit(triad::cli::main_with_args(std::env::args_os()));
}
