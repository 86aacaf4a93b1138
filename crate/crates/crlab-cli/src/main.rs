fn main() {
    std::process::exit(crlab_cli::run());
}
