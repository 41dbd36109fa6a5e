fn main() {
    std::process::exit(conescale::cli::run(std::env::args_os()));
}
