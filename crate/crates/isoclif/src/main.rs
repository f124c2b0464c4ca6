fn main() {
    std::process::exit(isoclif::cli::run(std::env::args_os()));
}
