fn main() -> std::process::ExitCode {
    eif_core::cli::main_with(std::env::args(), std::env::vars())
}
