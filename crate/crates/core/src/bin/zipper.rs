fn main() {
    std::process::exit(zipper_lab::cli::main_with(std::env::args_os()));
}
