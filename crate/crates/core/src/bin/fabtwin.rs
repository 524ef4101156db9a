fn main() {
    std::process::exit(fabtwin::cli::run(std::env::args_os()));
}
