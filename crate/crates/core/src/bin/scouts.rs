fn main() {
    std::process::exit(scoutgrid::cli::main_with_args(std::env::args_os()));
}
