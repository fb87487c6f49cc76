fn main() -> std::process::ExitCode {
    adthin::cli::main()
}
