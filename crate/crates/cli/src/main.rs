fn main() -> std::process::ExitCode {
    fastslow_cli::run(std::env::args_os())
}
