fn main() {
    std::process::exit(music_lite::cli::main_with_args(std::env::args_os()));
}
