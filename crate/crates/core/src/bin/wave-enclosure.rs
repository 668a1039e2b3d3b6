fn main() {
    std::process::exit(wave_enclosure::cli::run(std::env::args_os()));
}
