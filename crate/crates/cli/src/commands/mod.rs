//! Subcommands. Each one deserializes its own configuration body, checks it
//! before any compute, then fills an [`Outcome`].

mod estimates;
mod lemma;
mod norms;
mod reduce;
mod solve;

use std::time::Instant;

use qwlab::bilinear::SignPair;
use qwlab::verify::{DataFamily, LatticeMode, LatticeSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::Table;

use crate::config::{self, Common};
use crate::error::{is_input_error, CliError};
use crate::outcome::{write_all, Outcome, RunMeta};

pub use estimates::{ExtremizeCmd, KeyCmd, LowfreqCmd, SharpnessCmd, StrichartzCmd};
pub use lemma::{EllipticCmd, FarCmd, HyperbolicCmd, ShellCmd, SurfaceCmd};
pub use norms::NormsCmd;
pub use reduce::ReduceCmd;
pub use solve::{LipschitzCmd, SolveCmd};

pub trait Command: Serialize + DeserializeOwned + Default + Sync {
    /// Header of the main CSV table.
    fn columns() -> &'static [&'static str];

    /// Validates and materializes the configuration; no outputs exist yet.
    fn prepare(&mut self, common: &Common) -> Result<(), CliError>;

    fn execute(&self, common: &Common, out: &mut Outcome) -> Result<(), CliError>;
}

fn threads(workers: usize) -> usize {
    if workers > 0 {
        workers
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Runs a command and returns its exit status: 0 when every check passes,
/// 2 on a failed check or a numerical error, 1 on an input error found
/// during the run. Errors returned from here happen before any output.
pub fn run<C: Command>(name: &str, suite: Option<&str>, common: Common, body: Table) -> Result<i32, CliError> {
    let mut cfg: C = config::body(body)?;
    cfg.prepare(&common)?;
    let stem = match (&common.output.stem, suite) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => format!("{name}-{s}"),
        (None, None) => name.to_string(),
    };
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return Err(CliError::config(format!(
            "output stem `{stem}` must be a plain file name"
        )));
    }
    let dir = common.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::config(format!("output directory {}: {e}", dir.display())))?;

    let threads = threads(common.workers);
    let mut out = Outcome::new(crate::outcome::Table::new(C::columns()));
    let start = Instant::now();
    let result = qwlab::par::with_workers(threads, || cfg.execute(&common, &mut out));
    let seconds = start.elapsed().as_secs_f64();
    let (error, code) = match result {
        Ok(()) => (None, if out.passed() { 0 } else { 2 }),
        Err(e) => {
            let code = match &e {
                CliError::Core(c) if !is_input_error(c) => 2,
                _ => 1,
            };
            (Some(e.to_string()), code)
        }
    };
    let meta = RunMeta {
        command: name,
        suite,
        seed: common.seed,
        workers: common.workers,
        dir: &dir,
        stem: &stem,
    };
    let written = write_all(&meta, &cfg, &out, error.clone(), seconds, threads)?;
    for c in &out.checks {
        println!(
            "{} {}{}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value.map(|v| format!(" ({v:.6})")).unwrap_or_default()
        );
    }
    if let Some(e) = &error {
        eprintln!("incomplete: {e}");
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    println!(
        "{name}: {} in {seconds:.2}s",
        match code {
            0 => "pass",
            2 => "fail",
            _ => "error",
        }
    );
    Ok(code)
}

// ---- shared configuration pieces

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeCfg {
    pub n: usize,
    pub m: usize,
    /// Covariant lattices use frequency spacing `λ/cells_per_lambda`.
    pub cells_per_lambda: f64,
    /// A fixed box half-length instead of the covariant family.
    pub half_len: Option<f64>,
}

impl Default for LatticeCfg {
    fn default() -> Self {
        Self {
            n: 16,
            m: 32,
            cells_per_lambda: 3.0,
            half_len: None,
        }
    }
}

impl LatticeCfg {
    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec {
            n: self.n,
            m: self.m,
            cells_per_lambda: self.cells_per_lambda,
            mode: match self.half_len {
                Some(half_len) => LatticeMode::Fixed { half_len },
                None => LatticeMode::Covariant,
            },
        }
    }

    /// Every lattice of the ladder must exist and hold the data of each
    /// family without aliasing.
    pub fn validate(&self, lambdas: &[f64], families: &[&DataFamily]) -> Result<(), CliError> {
        let spec = self.spec();
        for &l in lambdas {
            let at = |e: qwlab::Error| CliError::config(format!("lattice at λ = {l}: {e}"));
            let grid = spec.grid_for(l).map_err(at)?;
            for f in families {
                spec.check_headroom(&grid, f.extent() * l).map_err(at)?;
            }
        }
        Ok(())
    }
}

pub fn gaussian() -> DataFamily {
    DataFamily::gaussian([0.0, 0.0, 1.0], 0.35)
}

pub fn parse_signs(list: &[String]) -> Result<Vec<SignPair>, CliError> {
    if list.is_empty() {
        return Err(CliError::config("signs must not be empty"));
    }
    list.iter()
        .map(|s| {
            SignPair::parse(s).ok_or_else(|| CliError::config(format!("sign pair `{s}` is not one of ++, +-, -+, --")))
        })
        .collect()
}

pub fn check_families(families: &[DataFamily]) -> Result<(), CliError> {
    if families.is_empty() {
        return Err(CliError::config("families must not be empty"));
    }
    for (i, f) in families.iter().enumerate() {
        f.validate().map_err(|e| CliError::config(format!("family {i}: {e}")))?;
    }
    Ok(())
}

pub fn check_positive(name: &str, values: &[f64], min_len: usize) -> Result<(), CliError> {
    if values.len() < min_len {
        return Err(CliError::config(format!("{name} needs at least {min_len} entries")));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(CliError::config(format!("{name} entry {v} must be positive")));
    }
    Ok(())
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}
