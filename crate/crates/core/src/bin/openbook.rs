fn main() { std::process::exit(openbook::cli::run()); }
