fn main() {
    std::process::exit(tddmp_cli::run(std::env::args_os()));
}
