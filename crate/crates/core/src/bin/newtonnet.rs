fn main() {
    std::process::exit(newtonnet::cli::run(std::env::args_os()));
}
