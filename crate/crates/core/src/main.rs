fn main() {
    std::process::exit(mtaug::cli::run(std::env::args_os()));
}
