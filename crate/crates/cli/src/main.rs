use std::io;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use clap::Parser;
use noether_cli::{run, Cli};

static CANCEL: AtomicBool = AtomicBool::new(false);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = ctrlc::set_handler(|| CANCEL.store(true, Ordering::Relaxed));
    if let Some(secs) = cli.timeout {
        if !(secs.is_finite() && secs > 0.0) {
            eprintln!("error: --timeout must be a positive number of seconds");
            return ExitCode::from(2);
        }
        std::thread::spawn(move || {
            std::thread::sleep(Duration::from_secs_f64(secs));
            CANCEL.store(true, Ordering::Relaxed);
        });
    }
    let code = run(
        &cli,
        &CANCEL,
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code)
}
