use clap::Parser;
use clap::error::ErrorKind;

mod cli;

fn main() {
    let parsed = match cli::Cli::try_parse() {
        Ok(parsed) => parsed,
        Err(err) => {
            // --help and --version are not usage errors.
            if matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            ) {
                let _ = err.print();
                std::process::exit(0);
            }
            let _ = err.print();
            std::process::exit(1);
        }
    };
    if let Err(err) = cli::run(parsed) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
