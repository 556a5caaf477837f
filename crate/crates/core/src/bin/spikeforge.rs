fn main() {
    std::process::exit(spikeforge::cli::main_with_args(std::env::args_os()));
}
