fn main() {
    std::process::exit(rds_bell::cli::run(std::env::args_os()));
}
