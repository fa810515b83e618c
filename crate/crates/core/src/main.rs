fn main() {
    std::process::exit(rotiq::cli::dispatch(std::env::args_os()));
}
