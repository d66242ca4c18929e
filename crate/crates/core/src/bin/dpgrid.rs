fn main() {
    std::process::exit(dpgrid::cli::main());
}
