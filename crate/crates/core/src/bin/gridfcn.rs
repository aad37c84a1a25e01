use clap::Parser;
use gridfcn::cli::{run, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let quiet = cli.quiet;
    match run(cli) {
        Ok(summary) => {
            if !quiet {
                println!("{summary}");
            }
        }
        Err(e) => {
            eprintln!("gridfcn: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
