fn main() {
    std::process::exit(slcf_cli::run(std::env::args_os()));
}
