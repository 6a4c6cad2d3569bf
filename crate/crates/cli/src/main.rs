fn main() {
    std::process::exit(fraclab_cli::main_with(std::env::args_os()));
}
