fn main() {
    std::process::exit(topofc_cli::run(std::env::args_os()));
}
