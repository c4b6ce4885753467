fn main() {
    std::process::exit(entente::mock::main_from_args(std::env::args().skip(1)));
}
