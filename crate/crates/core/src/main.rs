fn main() {
    std::process::exit(fatoulab::cli::run(std::env::args_os()));
}
