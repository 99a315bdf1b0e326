fn main() {
    std::process::exit(pt_cs::cli::main_with_args(std::env::args_os()));
}
