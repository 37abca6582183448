//! `spacefill` command-line tool.

fn main() {
    let code = spacefill::cli::run(
        std::env::args_os(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
