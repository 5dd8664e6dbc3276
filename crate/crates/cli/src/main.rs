mod commands;
mod config;
mod error;
mod outcome;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "qwlab",
    version,
    about = "Numerical experiments for quadratic wave equations with Fourier-Lebesgue data"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML configuration file; defaults apply to anything it omits.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Base seed for random data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set lattice.n=24`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Cmd {
    /// Norms of stored field containers.
    Norms,
    /// Tables of the one-dimensional reduction integrals.
    Reduce,
    /// Product lemmas, far-region scaling, shell masses, surface check.
    Lemma {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
    /// Key bilinear estimate on a frequency ladder.
    Key,
    /// Ratio growth below the regularity threshold.
    Sharpness,
    /// Low-frequency Young bound.
    Lowfreq,
    /// L² bilinear Strichartz input.
    Strichartz,
    /// Search for data that maximize the key-estimate ratio.
    Extremize,
    /// Local solution by Picard iteration with diagnostics.
    Solve,
    /// Lipschitz dependence of the flow map and δ against data size.
    Lipschitz,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Suite {
    Elliptic,
    Hyperbolic,
    Far,
    Shell,
    Surface,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Norms => "norms",
            Cmd::Reduce => "reduce",
            Cmd::Lemma { .. } => "lemma",
            Cmd::Key => "key",
            Cmd::Sharpness => "sharpness",
            Cmd::Lowfreq => "lowfreq",
            Cmd::Strichartz => "strichartz",
            Cmd::Extremize => "extremize",
            Cmd::Solve => "solve",
            Cmd::Lipschitz => "lipschitz",
        }
    }
}

fn suite_from(name: &str) -> Result<Suite, CliError> {
    Suite::from_str(name, true).map_err(|_| CliError::config(format!("unknown lemma suite `{name}`")))
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let mut table = config::load(cli.config.as_deref())?;
    for s in &cli.set {
        config::apply_override(&mut table, s)?;
    }
    let (mut common, body) = config::split(table)?;
    let name = cli.command.name();
    if let Some(c) = &common.command {
        if c != name {
            return Err(CliError::config(format!("configuration is for `{c}`, not `{name}`")));
        }
    }
    common.command = Some(name.to_string());
    if let Some(s) = cli.seed {
        common.seed = s;
    }
    if let Some(w) = cli.workers {
        common.workers = w;
    }
    if let Some(o) = cli.out {
        common.output.dir = o;
    }
    fn go<C: Command>(
        name: &str,
        suite: Option<&str>,
        common: config::Common,
        body: toml::Table,
    ) -> Result<i32, CliError> {
        run::<C>(name, suite, common, body)
    }
    use commands::*;
    match cli.command {
        Cmd::Lemma { suite } => {
            let suite = match (suite, &common.suite) {
                (Some(s), _) => s,
                (None, Some(s)) => suite_from(s)?,
                (None, None) => Suite::Elliptic,
            };
            let s = suite
                .to_possible_value()
                .expect("no skipped variants")
                .get_name()
                .to_string();
            common.suite = Some(s.clone());
            let s = Some(s.as_str());
            match suite {
                Suite::Elliptic => go::<EllipticCmd>(name, s, common, body),
                Suite::Hyperbolic => go::<HyperbolicCmd>(name, s, common, body),
                Suite::Far => go::<FarCmd>(name, s, common, body),
                Suite::Shell => go::<ShellCmd>(name, s, common, body),
                Suite::Surface => go::<SurfaceCmd>(name, s, common, body),
            }
        }
        _ if common.suite.is_some() => Err(CliError::config(format!(
            "`suite` applies to `lemma` only, not `{name}`"
        ))),
        Cmd::Norms => go::<NormsCmd>(name, None, common, body),
        Cmd::Reduce => go::<ReduceCmd>(name, None, common, body),
        Cmd::Key => go::<KeyCmd>(name, None, common, body),
        Cmd::Sharpness => go::<SharpnessCmd>(name, None, common, body),
        Cmd::Lowfreq => go::<LowfreqCmd>(name, None, common, body),
        Cmd::Strichartz => go::<StrichartzCmd>(name, None, common, body),
        Cmd::Extremize => go::<ExtremizeCmd>(name, None, common, body),
        Cmd::Solve => go::<SolveCmd>(name, None, common, body),
        Cmd::Lipschitz => go::<LipschitzCmd>(name, None, common, body),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
