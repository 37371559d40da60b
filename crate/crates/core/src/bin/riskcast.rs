fn main() {
    std::process::exit(riskcast::cli::run(std::env::args().skip(1)));
}
