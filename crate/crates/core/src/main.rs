fn main() {
    std::process::exit(regret_lp::harness::cli::run());
}
