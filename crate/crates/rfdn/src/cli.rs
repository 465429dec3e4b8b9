use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

use crate::commands::{
    cmd_analyze, cmd_degrade, cmd_eval, cmd_sr, cmd_train, AnalyzeArgs, DegradeArgs, EvalArgs, SrArgs, TrainArgs,
};
use crate::error::{CliError, Result};

/// Residual feature distillation network for single-image super-resolution.
#[derive(Parser, Debug)]
#[command(name = "rfdn", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write bicubic-downscaled copies of every HR image.
    Degrade(DegradeArgs),
    /// Train a network on HR images degraded in memory.
    Train(TrainArgs),
    /// Super-resolve one image.
    Sr(SrArgs),
    /// Average PSNR/SSIM on the luma channel over an HR directory.
    Eval(EvalArgs),
    /// Print parameter and Mult-Adds counts.
    Analyze(AnalyzeArgs),
}

pub fn dispatch(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Degrade(a) => cmd_degrade(a, out).map(drop),
        Command::Train(a) => cmd_train(a, out).map(drop),
        Command::Sr(a) => cmd_sr(a, out),
        Command::Eval(a) => cmd_eval(a, out).map(drop),
        Command::Analyze(a) => cmd_analyze(a, out).map(drop),
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => report(&e, err),
    }
}

fn report(e: &CliError, err: &mut dyn Write) -> u8 {
    let _ = writeln!(err, "error: {e}");
    e.exit_code()
}
