fn main() {
    std::process::exit(curveflow::cli::main_with(std::env::args_os()));
}
