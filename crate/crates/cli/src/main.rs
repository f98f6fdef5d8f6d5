fn main() {
    std::process::exit(hypgeo_cli::run(std::env::args_os()));
}
