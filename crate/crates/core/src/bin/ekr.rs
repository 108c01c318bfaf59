fn main() {
    std::process::exit(ekr_core::cli::main_with_args(std::env::args_os()));
}
