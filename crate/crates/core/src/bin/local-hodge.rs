use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use local_hodge::harness::{
    convergence_csv, parse_levels, run_convergence, run_infsup, run_locality, run_solve, run_unisolvency, write_outputs,
    Report, StudyConfig,
};
use local_hodge::hodge::Variant;
use local_hodge::mesh::{Domain, MeshKind};
use local_hodge::{Error, Result};

#[derive(Parser)]
#[command(name = "local-hodge", version, about = "Mixed Hodge Laplace studies with local coderivatives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Errors and observed rates for a manufactured solution.
    Convergence(StudyArgs),
    /// Far/near perturbation probes of the discrete coderivative.
    Locality(StudyArgs),
    /// Exact checks of the enriched cubical spaces.
    Unisolvency {
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest singular value of the saddle operator per level.
    Infsup(StudyArgs),
    /// One manufactured solve, with conservation checks for k = n.
    Solve(StudyArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// JSON study configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    domain: Option<Domain>,
    #[arg(long)]
    kind: Option<MeshKind>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    variant: Option<Variant>,
    /// Comma list (2,3,4) or inclusive range (2-6).
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path without extension; reports go to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl StudyArgs {
    fn config(&self) -> Result<StudyConfig> {
        let mut c = match &self.config {
            Some(p) => StudyConfig::from_json_file(p)?,
            None => {
                let missing = |f: &str| Error::Config(format!("--{f} is required without --config"));
                StudyConfig::new(
                    self.domain.ok_or_else(|| missing("domain"))?,
                    self.kind.ok_or_else(|| missing("kind"))?,
                    self.k.ok_or_else(|| missing("k"))?,
                    self.variant.unwrap_or(Variant::Lumped),
                    parse_levels(self.levels.as_deref().ok_or_else(|| missing("levels"))?)?,
                )
            }
        };
        if let Some(d) = self.domain {
            c.domain = d;
        }
        if let Some(k) = self.kind {
            c.kind = k;
        }
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(v) = self.variant {
            c.variant = v;
        }
        if let Some(l) = &self.levels {
            c.levels = parse_levels(l)?;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if self.out.is_some() {
            c.out.clone_from(&self.out);
        }
        Ok(c)
    }
}

fn emit<T: Serialize>(command: &str, result: T, out: Option<&PathBuf>, csv: Option<String>) -> Result<()> {
    let json = Report::new(command, result)?.to_json()?;
    match out {
        Some(base) => {
            write_outputs(base, &json, csv.as_deref())?;
            eprintln!("wrote {}", base.with_extension("json").display());
        }
        None => print!("{}", csv.unwrap_or(json)),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Convergence(a) => {
            let c = a.config()?;
            let r = run_convergence(&c)?;
            let passed = r.passed;
            let csv = convergence_csv(&r);
            emit("convergence", r, c.out.as_ref(), Some(csv))?;
            Ok(passed)
        }
        Command::Locality(a) => {
            let c = a.config()?;
            let r = run_locality(&c)?;
            let passed = r.passed;
            emit("locality", r, c.out.as_ref(), None)?;
            Ok(passed)
        }
        Command::Unisolvency { n_max, seed, out } => {
            let r = run_unisolvency(n_max, seed)?;
            let passed = r.failed == 0;
            emit("unisolvency", r, out.as_ref(), None)?;
            Ok(passed)
        }
        Command::Infsup(a) => {
            let c = a.config()?;
            let r = run_infsup(&c)?;
            let passed = r.all_positive();
            emit("infsup", r, c.out.as_ref(), None)?;
            Ok(passed)
        }
        Command::Solve(a) => {
            let c = a.config()?;
            let r = run_solve(&c)?;
            emit("solve", r, c.out.as_ref(), None)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    faer::set_global_parallelism(faer::Par::Seq);
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("study completed but did not meet its pass criterion");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
