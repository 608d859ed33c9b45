fn main() {
    std::process::exit(hyperlocal::cli::run(std::env::args_os()));
}
