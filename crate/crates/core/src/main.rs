fn main() {
    std::process::exit(fblab::harness::run_cli(std::env::args_os()));
}
