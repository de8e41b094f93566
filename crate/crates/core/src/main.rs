fn main() {
    std::process::exit(hktriples::cli::run(std::env::args_os()));
}
