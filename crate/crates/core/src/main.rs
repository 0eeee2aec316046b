fn main() -> std::process::ExitCode {
    radial_sp::cli::main()
}
