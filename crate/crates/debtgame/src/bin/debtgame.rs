fn main() {
    std::process::exit(debtgame::cli::run());
}
