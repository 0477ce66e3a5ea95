use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use strongres_cli::run::{execute, Command, Options, EXIT_INPUT};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Strong,
    Principalize,
    Invariants,
    Verify,
}

/// Strong embedded desingularization and principalization over Q.
#[derive(Debug, Parser)]
#[command(name = "strongres", version)]
struct Args {
    command: Cmd,
    /// Problem file, or an emitted JSON document for `verify`.
    input: PathBuf,
    #[arg(long, value_name = "PATH")]
    emit_json: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    emit_dot: Option<PathBuf>,
    /// Print one line per blowup step.
    #[arg(long)]
    trace: bool,
    /// Re-check the emitted document independently.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_name = "N", default_value_t = 200)]
    max_steps: usize,
    /// Treat a coordinate hyperplane as an initial exceptional divisor.
    #[arg(long, value_name = "NAME")]
    seed_exceptional: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Cmd::Strong => Command::Strong,
        Cmd::Principalize => Command::Principalize,
        Cmd::Invariants => Command::Invariants,
        Cmd::Verify => Command::Verify,
    };
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.input.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    let opts = Options {
        verify: args.verify,
        max_steps: args.max_steps,
        seed_exceptional: args.seed_exceptional,
    };
    let out = execute(command, &text, &opts);
    if args.trace {
        for line in &out.trace {
            println!("{line}");
        }
    }
    if out.exit_code == 0 || out.exit_code == 2 {
        print!("{}", out.summary);
    } else {
        eprint!("{}", out.summary);
    }
    if let Some(path) = &args.emit_json {
        if let Err(e) = std::fs::write(path, &out.json) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    if let Some(path) = &args.emit_dot {
        let dot = out.dot.as_deref().unwrap_or("digraph charts {\n}\n");
        if let Err(e) = std::fs::write(path, dot) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    ExitCode::from(out.exit_code as u8)
}
