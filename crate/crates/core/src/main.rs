fn main() -> std::process::ExitCode {
    bbrecog::cli::main()
}
