fn main() {
    std::process::exit(fuzzseed::cli::run(std::env::args_os()));
}
