fn main() {
    std::process::exit(kzcocycle::cli::run(std::env::args_os()));
}
