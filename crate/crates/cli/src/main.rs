use std::io::Write;

fn main() {
    let (code, text) = affjet_cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(text.as_bytes());
    std::process::exit(code);
}
