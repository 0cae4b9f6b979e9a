fn main() {
    std::process::exit(freechaos_cli::main_with_args(std::env::args_os()));
}
