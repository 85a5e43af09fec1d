use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qgz3_cli::{parse_rep, run, Command, Format, Mode, RunConfig};

#[derive(Parser)]
#[command(
    name = "qgz3",
    version,
    about = "U_q(sl3) Gelfand-Zetlin representations at generic q and at roots of unity"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Serialize the six generator matrices.
    Build(Opts),
    /// Check relations, nilpotency, the limit oracle and the Casimir.
    Verify(Opts),
    /// Reducibility, slices and flat-case structure.
    Analyze(Opts),
    /// Build, verify, analyze and plot data in one bundle.
    Export(Opts),
    /// Pyramid coordinates and state classes.
    Plotdata(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Generic,
    Root,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct Opts {
    /// Highest weight as p13,p23,p33.
    #[arg(long, value_parser = parse_rep, allow_hyphen_values = true)]
    rep: [i64; 3],
    /// Odd root order.
    #[arg(long)]
    l: Option<u32>,
    /// Defaults to root when --l is given.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Selects q = exp(i pi m / l).
    #[arg(long)]
    m: Option<u32>,
    /// Generic q = exp(i angle).
    #[arg(long)]
    angle: Option<f64>,
    /// Comma-separated oracle schedule.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = std::env::var("QGZ3_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("QGZ3_THREADS ignored: {e}");
            }
        }
    }
    let cli = Cli::parse();
    let (cmd, o) = match cli.command {
        Cmd::Build(o) => (Command::Build, o),
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Analyze(o) => (Command::Analyze, o),
        Cmd::Export(o) => (Command::Export, o),
        Cmd::Plotdata(o) => (Command::Plotdata, o),
    };
    let mode = o.mode.map(|m| match m {
        ModeArg::Generic => Mode::Generic,
        ModeArg::Root => Mode::Root,
    });
    let format = match o.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    let result = RunConfig::new(o.rep, o.l, mode, o.m, o.angle, o.eps, o.out, format)
        .and_then(|cfg| run(cmd, &cfg));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qgz3: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
