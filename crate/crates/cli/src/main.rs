fn main() {
    std::process::exit(wishart_cli::run(std::env::args_os()));
}
