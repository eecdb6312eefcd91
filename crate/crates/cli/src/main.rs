fn main() {
    std::process::exit(lae_cli::run(std::env::args_os()));
}
