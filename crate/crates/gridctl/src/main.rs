use std::io::Write;

fn main() {
    let outcome = gridctl::cli::dispatch(std::env::args_os());
    let mut stdout = std::io::stdout();
    let _ = stdout.write_all(outcome.stdout.as_bytes());
    let _ = stdout.flush();
    std::process::exit(outcome.exit_code);
}
