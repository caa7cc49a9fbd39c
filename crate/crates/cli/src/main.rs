fn main() {
    std::process::exit(sparselab_cli::main_with_args(std::env::args_os()));
}
