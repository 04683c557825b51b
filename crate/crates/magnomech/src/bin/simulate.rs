fn main() {
    std::process::exit(magnomech::cli::main_entry());
}
