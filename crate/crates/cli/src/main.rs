fn main() {
    std::process::exit(hireg_cli::run(std::env::args_os()));
}
