use clap::Parser;
use wdm_vlc_cli::{exit, run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            if cli.common.verbose > 1 {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            std::process::exit(exit::OK);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
