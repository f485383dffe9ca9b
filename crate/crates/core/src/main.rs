fn main() {
    std::process::exit(matprox::cli::run(std::env::args_os()));
}
