fn main() {
    std::process::exit(cvdistill::cli::main_with_args(std::env::args_os()));
}
