fn main() {
    std::process::exit(atc_stack::cli::main_with_args(std::env::args_os()));
}
