fn main() {
    std::process::exit(inexact_ipm::cli::run(std::env::args_os()));
}
