fn main() {
    std::process::exit(sgreg::cli::run(std::env::args_os()));
}
