fn main() {
    std::process::exit(commuting_tori::cli::run(std::env::args_os()));
}
