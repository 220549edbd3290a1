fn main() {
    let code = dragflow_service::cli::execute(std::env::args_os(), &mut std::io::stdout());
    std::process::exit(code);
}
