fn main() {
    std::process::exit(ftsim_cli::run(std::env::args_os()));
}
