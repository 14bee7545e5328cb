fn main() {
    std::process::exit(infcanvas::cli::run());
}
