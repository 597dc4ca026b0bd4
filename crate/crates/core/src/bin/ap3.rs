fn main() {
    std::process::exit(ap3_core::cli::run(std::env::args_os()));
}
