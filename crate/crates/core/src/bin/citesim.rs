fn main() {
    std::process::exit(citesim::cli::cli_main(std::env::args_os()));
}
