fn main() {
    std::process::exit(icascade::cli::main());
}
