fn main() {
    std::process::exit(ga_varsel::cli::main_with_args(std::env::args_os()));
}
