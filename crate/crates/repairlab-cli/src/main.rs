fn main() {
    std::process::exit(repairlab_cli::run_from(std::env::args_os()));
}
