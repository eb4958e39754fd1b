fn main() {
    std::process::exit(levy_ma::cli::run(std::env::args_os()));
}
