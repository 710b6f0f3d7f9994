fn main() {
    std::process::exit(fouriergnn::cli::run());
}
