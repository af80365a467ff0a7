fn main() {
    std::process::exit(qdc_cli::run(std::env::args_os()));
}
