fn main() {
    std::process::exit(waffle_cli::main_with_args(std::env::args_os()));
}
