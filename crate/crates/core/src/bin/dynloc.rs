fn main() {
    std::process::exit(dynloc::cli::main());
}
