fn main() {
    std::process::exit(designforge::cli::run());
}
