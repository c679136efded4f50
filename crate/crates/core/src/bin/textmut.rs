fn main() {
    std::process::exit(textmut::cli::run());
}
