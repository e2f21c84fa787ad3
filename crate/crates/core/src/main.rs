fn main() {
    std::process::exit(dqbf_kernel::cli::main());
}
