fn main() {
    std::process::exit(bff_core::cli::run(std::env::args_os()));
}
