fn main() {
    std::process::exit(crossfield::cli::run(std::env::args_os()));
}
