fn main() {
    std::process::exit(sgml::cli::main_with_args(std::env::args_os()));
}
