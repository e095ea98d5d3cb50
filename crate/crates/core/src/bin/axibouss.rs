fn main() {
    std::process::exit(axibouss::cli::main(std::env::args_os()));
}
