fn main() {
    std::process::exit(pilotgain_cli::run(std::env::args_os()));
}
