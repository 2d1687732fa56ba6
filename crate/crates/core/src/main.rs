fn main() {
    std::process::exit(fairsect::cli::run(std::env::args_os()));
}
