fn main() {
    std::process::exit(label_bracket::cli::main_with_args(std::env::args_os()));
}
