fn main() {
    std::process::exit(stcode::cli::main_with(std::env::args_os()));
}
