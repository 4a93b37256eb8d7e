fn main() {
    std::process::exit(ews::cli::main_with_args(std::env::args_os()));
}
