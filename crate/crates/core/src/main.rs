fn main() {
    std::process::exit(gnomon::cli::main_with_args(std::env::args_os()));
}
