use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = qlsearch_cli::main_with_args(std::env::args_os(), &mut out, &mut std::io::stderr());
    ExitCode::from(code as u8)
}
