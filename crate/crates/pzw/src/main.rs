fn main() {
    std::process::exit(pzw::cli::run());
}
