fn main() {
    std::process::exit(quartic_sieve::cli::run(std::env::args_os()));
}
