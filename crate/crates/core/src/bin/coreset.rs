fn main() {
    std::process::exit(online_coresets::cli::main_with_args(std::env::args_os()));
}
