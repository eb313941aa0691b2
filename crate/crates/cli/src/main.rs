fn main() {
    std::process::exit(bwc_cli::run(std::env::args_os()));
}
