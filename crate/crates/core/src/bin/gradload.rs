fn main() -> std::process::ExitCode {
    gradload::cli::main()
}
