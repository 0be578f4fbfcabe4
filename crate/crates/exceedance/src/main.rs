fn main() {
    std::process::exit(exceedance::cli::run());
}
