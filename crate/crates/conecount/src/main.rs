fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(conecount::cli::dispatch(&args));
}
