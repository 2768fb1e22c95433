fn main() {
    std::process::exit(quasisparse::cli::run(std::env::args_os()));
}
