fn main() {
    std::process::exit(negen_cli::run(std::env::args_os()));
}
