fn main() {
    std::process::exit(osc_spectra::cli::run());
}
