fn main() {
    std::process::exit(plexdyn::cli::run(std::env::args_os()));
}
