fn main() {
    std::process::exit(wishart_product::cli::run(std::env::args_os()));
}
