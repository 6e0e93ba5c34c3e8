fn main() {
    std::process::exit(privf_cli::main_with(std::env::args_os()));
}
