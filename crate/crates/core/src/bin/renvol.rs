fn main() {
    std::process::exit(renvol::cli::main_with_args(std::env::args_os()));
}
