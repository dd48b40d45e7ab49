fn main() {
    std::process::exit(handeye::cli::run(std::env::args_os()));
}
