fn main() {
    std::process::exit(stgan_nd::cli::run_from(std::env::args_os()));
}
