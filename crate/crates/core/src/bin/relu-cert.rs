fn main() -> std::process::ExitCode {
    relu_cert::cli::main().into()
}
