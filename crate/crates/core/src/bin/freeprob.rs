fn main() {
    std::process::exit(freeprob::cli::run(std::env::args_os()));
}
