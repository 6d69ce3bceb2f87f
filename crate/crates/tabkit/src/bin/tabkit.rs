fn main() {
    std::process::exit(tabkit::cli::run());
}
