fn main() {
    std::process::exit(qcl::cli::run(std::env::args()));
}
