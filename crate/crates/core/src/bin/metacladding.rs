fn main() {
    std::process::exit(metacladding::cli::run(std::env::args_os()));
}
