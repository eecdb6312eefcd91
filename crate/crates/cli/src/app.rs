//! Subcommand dispatch and exit codes.

use std::path::PathBuf;

use clap::Parser;

use crate::config::{parse_config, Config, ConfigError};
use crate::experiments::{self, Outcome};
use crate::manifest::RunManifest;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const SUBCOMMANDS: [&str; 6] =
    ["run-lae", "run-mc", "verify-magnus", "verify-lemma2", "verify-wick", "verify-commutation"];

pub const THREADS_ENV: &str = "LAE_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lae-lab", version, about = "Numerical laboratory for the Lagrangian-averaged stochastic fluid model")]
pub struct Cli {
    /// One of run-lae, run-mc, verify-magnus, verify-lemma2, verify-wick, verify-commutation
    pub subcommand: String,
    /// INI configuration file; defaults apply when omitted
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Key overrides of the form --section.key=value
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    pub overrides: Vec<String>,
}

pub fn usage() -> String {
    format!("usage: lae-lab <{}> [--config FILE] [--section.key=value ...]", SUBCOMMANDS.join("|"))
}

fn seed_of(subcommand: &str, cfg: &Config) -> u64 {
    match subcommand {
        "run-lae" => cfg.model.xi_seed,
        _ => cfg.mc.seed,
    }
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())
}

/// Run `subcommand` and return its exit code; a manifest is written to the
/// output directory before the run and finalised after it.
pub fn dispatch(subcommand: &str, cfg: &Config) -> i32 {
    let run: fn(&Config, &std::path::Path) -> anyhow::Result<Outcome> = match subcommand {
        "run-lae" => experiments::run_lae,
        "run-mc" => experiments::run_mc,
        "verify-magnus" => experiments::verify_magnus,
        "verify-lemma2" => experiments::verify_lemma2,
        "verify-wick" => experiments::verify_wick,
        "verify-commutation" => experiments::verify_commutation_cmd,
        other => {
            eprintln!("unknown subcommand `{other}`\n{}", usage());
            return EXIT_USAGE;
        }
    };
    if let Err(e) = cfg.validate() {
        eprintln!("configuration error: {e}");
        return EXIT_USAGE;
    }
    let dir = &cfg.output.dir;
    if let Err(e) = std::fs::create_dir_all(dir) {
        eprintln!("cannot create {}: {e}", dir.display());
        return EXIT_USAGE;
    }
    let mut manifest = RunManifest::begin(subcommand, cfg, seed_of(subcommand, cfg));
    if let Err(e) = manifest.write(dir) {
        eprintln!("cannot write manifest: {e}");
        return EXIT_USAGE;
    }

    let result = match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cfg, dir)),
            Err(e) => Err(e.into()),
        },
        None => run(cfg, dir),
    };
    let (code, status, outputs) = match result {
        Ok(o) => {
            println!("{}", o.summary);
            let (code, status) = if o.passed { (EXIT_PASS, "pass") } else { (EXIT_FAIL, "fail") };
            println!("{subcommand}: {}", status.to_uppercase());
            (code, status, o.outputs)
        }
        Err(e) => {
            eprintln!("{subcommand}: {e:#}");
            let io = e.chain().any(|c| c.is::<std::io::Error>() || c.is::<lae_core::io::IoError>());
            (if io { EXIT_USAGE } else { EXIT_FAIL }, "error", Vec::new())
        }
    };
    manifest.finish(status, code, &outputs);
    if let Err(e) = manifest.write(dir) {
        eprintln!("cannot finalise manifest: {e}");
        return EXIT_USAGE;
    }
    code
}

fn load(cli: &Cli) -> Result<Config, ConfigError> {
    let mut cfg = match &cli.config {
        Some(p) => parse_config(p)?,
        None => Config::default(),
    };
    cfg.apply_overrides(&cli.overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Entry point taking the full argument vector, program name included.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    if !SUBCOMMANDS.contains(&cli.subcommand.as_str()) {
        eprintln!("unknown subcommand `{}`\n{}", cli.subcommand, usage());
        return EXIT_USAGE;
    }
    match load(&cli) {
        Ok(cfg) => dispatch(&cli.subcommand, &cfg),
        Err(e) => {
            eprintln!("configuration error: {e}");
            EXIT_USAGE
        }
    }
}
