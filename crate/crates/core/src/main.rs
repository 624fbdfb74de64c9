fn main() {
    std::process::exit(pathvisc::cli::run(std::env::args_os()));
}
