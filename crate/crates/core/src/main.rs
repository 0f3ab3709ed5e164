fn main() {
    std::process::exit(meetpd::cli::run(std::env::args_os()));
}
