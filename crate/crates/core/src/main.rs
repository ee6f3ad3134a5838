fn main() {
    std::process::exit(corank_lab::cli::dispatch(std::env::args_os()));
}
