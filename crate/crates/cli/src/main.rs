use ams_cli::{run_scenario, Options};
use clap::Parser;

/// Run a mutual-suspicion scenario in the deterministic simulator and print
/// its event log.
#[derive(Parser)]
#[command(name = "ams-sim", version)]
struct Cli {
    #[command(flatten)]
    opts: Options,
}

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_scenario(&cli.opts, &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
