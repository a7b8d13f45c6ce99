fn main() {
    std::process::exit(shockselect::cli::run(std::env::args_os()));
}
