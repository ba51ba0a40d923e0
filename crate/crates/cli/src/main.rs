fn main() {
    std::process::exit(factorineq_cli::run(std::env::args_os()));
}
