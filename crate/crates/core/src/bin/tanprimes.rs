fn main() {
    std::process::exit(tangent_primes::cli::run(std::env::args_os()));
}
