fn main() {
    if let Err(err) = chaos_swr::cli::run(std::env::args_os()) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}
