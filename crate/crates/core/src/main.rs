fn main() {
    let code = nlos_ltm::cli::run(std::env::args_os());
    std::process::exit(code);
}
