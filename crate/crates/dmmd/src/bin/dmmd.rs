fn main() -> std::process::ExitCode {
    dmmd::cli::main_with(std::env::args_os())
}
