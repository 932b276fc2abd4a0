fn main() {
    std::process::exit(hebbcl::cli::run(std::env::args_os()));
}
