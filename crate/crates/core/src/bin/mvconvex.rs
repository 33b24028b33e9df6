fn main() {
    std::process::exit(mvconvex::cli::main_with_args(std::env::args_os()));
}
