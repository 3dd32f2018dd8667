fn main() {
    std::process::exit(heiskam_cli::dispatch(std::env::args_os()));
}
