fn main() {
    std::process::exit(simplexforge_cli::main_with_args(std::env::args_os()));
}
