fn main() {
    std::process::exit(asymclone_cli::run(std::env::args_os()));
}
