fn main() {
    std::process::exit(tree_energy::cli::run(std::env::args_os()));
}
