fn main() {
    std::process::exit(refleq::cli::run());
}
