fn main() {
    std::process::exit(radnorm::cli::run(std::env::args_os()));
}
