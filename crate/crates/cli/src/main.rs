fn main() {
    std::process::exit(csh_cli::run(std::env::args_os()));
}
