use clap::error::ErrorKind;
use clap::Parser;
use earlysim_cli::{run, Cli};

fn main() {
    // Usage errors share the validation exit code; help and version keep
    // clap's success behavior.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            std::process::exit(1);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
