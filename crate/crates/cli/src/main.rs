fn main() {
    std::process::exit(archtrace_cli::run(std::env::args_os()));
}
