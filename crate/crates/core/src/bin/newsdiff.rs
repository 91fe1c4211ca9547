fn main() {
    std::process::exit(newsdiff::cli::main_with_args(std::env::args_os()));
}
