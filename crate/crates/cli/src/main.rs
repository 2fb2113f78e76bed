use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lgt_cli::decay::{nonincreasing_within, run_decay};
use lgt_cli::drivers::{run_bounds, run_enumerate, run_higgs, BOUNDS_HEADER, ENUMERATE_HEADER};
use lgt_cli::report::{decay_svg, write_csv, write_decay_csv, write_text};
use lgt_cli::verify::{run_verify, CheckRow, CHECK_HEADER};
use lgt_cli::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lgt", version, about = "Finite lattice gauge theory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Exhaustive gauge, swap and Peierls checks.
    Verify,
    /// Exact partition function and pushforward law per β.
    Enumerate,
    /// Monte Carlo covariance against separation, with an exponential fit.
    Decay,
    /// Closed-form percolation and covariance bounds.
    Bounds,
    /// Swap and Φ⁽²⁾ checks for the Higgs models.
    Higgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(&cli.out, e))?;
    let out = |name: &str| cli.out.join(name);
    match cli.command {
        Command::Verify => checks(&run_verify(&cfg)?, &out("verify.csv")),
        Command::Higgs => checks(&run_higgs(&cfg)?, &out("higgs.csv")),
        Command::Enumerate => {
            let rows = run_enumerate(&cfg)?;
            for r in &rows {
                println!("beta={} Z={:.12e} mean_plaquette={:.12} tv={:.3e}", r.beta, r.partition_function, r.mean_plaquette, r.tv);
            }
            write_csv(&out("enumerate.csv"), &ENUMERATE_HEADER, &rows)?;
            Ok(0)
        }
        Command::Bounds => {
            let rep = run_bounds(&cfg)?;
            println!("delta={:.12} beta_threshold={:.6}", rep.delta, rep.threshold);
            write_csv(&out("bounds.csv"), &BOUNDS_HEADER, &rep.rows)?;
            Ok(0)
        }
        Command::Decay => {
            let res = run_decay(&cfg, cfg.seed, cli.workers)?;
            write_decay_csv(&out("decay.csv"), &res.rows)?;
            write_text(&out("decay.svg"), &decay_svg(&res.rows, res.reference_slope))?;
            for r in &res.rows {
                println!("L={} cov={:.6e} stderr={:.3e} n={}", r.l, r.cov, r.stderr, r.n);
            }
            match &res.fit {
                Ok(f) => println!("fit rate={:.6} intercept={:.6} r2={:.6} excluded={:?}", f.rate, f.intercept, f.r_squared, f.excluded),
                Err(e) => println!("fit: {e}"),
            }
            println!("reference slope={:.6}", res.reference_slope);
            if let Err(i) = nonincreasing_within(&res.rows, 2.0) {
                println!("|cov| rises between L={} and L={}", res.rows[i].l, res.rows[i + 1].l);
            }
            Ok(0)
        }
    }
}

fn checks(rows: &[CheckRow], path: &Path) -> Result<u8, CliError> {
    write_csv(path, &CHECK_HEADER, rows)?;
    let mut failed = false;
    for r in rows {
        let status = if r.pass { "ok  " } else { "FAIL" };
        match r.witness {
            Some(w) => println!("{status} {} {} cases={} witness={w}", r.instance, r.check, r.cases),
            None => println!("{status} {} {} cases={}", r.instance, r.check, r.cases),
        }
        failed |= !r.pass;
    }
    Ok(u8::from(failed))
}
