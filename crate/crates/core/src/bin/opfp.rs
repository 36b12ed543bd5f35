fn main() {
    std::process::exit(opf_pursuit::cli::main_with_args(std::env::args_os()));
}
