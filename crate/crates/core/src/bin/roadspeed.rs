fn main() {
    std::process::exit(roadspeed::cli::main_with_args(std::env::args_os()));
}
