fn main() {
    std::process::exit(usolab::cli::main_with_args(std::env::args_os()));
}
