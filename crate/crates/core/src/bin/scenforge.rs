fn main() -> ! {
    scenforge::cli::main()
}
