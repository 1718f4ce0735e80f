fn main() -> std::process::ExitCode {
    oraclebound::cli::main()
}
