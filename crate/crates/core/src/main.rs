use clap::Parser;

fn main() {
    let cli = match hct::cli::Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { hct::cli::EXIT_USAGE } else { hct::cli::EXIT_OK });
        }
    };
    let code = hct::cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
