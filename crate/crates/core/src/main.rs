fn main() {
    std::process::exit(mdkin::cli::run(std::env::args_os()));
}
