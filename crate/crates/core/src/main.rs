fn main() {
    std::process::exit(onis::cli::run(std::env::args_os()));
}
