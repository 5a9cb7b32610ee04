fn main() {
    let code = magspec::cli::run(std::env::args_os());
    std::process::exit(code);
}
