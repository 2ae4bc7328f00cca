fn main() {
    std::process::exit(regcap::cli::run(std::env::args_os()));
}
