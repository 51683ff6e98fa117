fn main() {
    std::process::exit(renosc::run_cli());
}
