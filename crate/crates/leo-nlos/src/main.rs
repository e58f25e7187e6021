fn main() {
    let code = leo_nlos::run(std::env::args_os());
    std::process::exit(code);
}
