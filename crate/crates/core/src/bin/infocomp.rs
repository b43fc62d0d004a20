fn main() {
    std::process::exit(infocomp::cli::run());
}
