fn main() {
    std::process::exit(modelcomp::cli::main(std::env::args_os()));
}
