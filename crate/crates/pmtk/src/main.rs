use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pmtk::config::ExperimentConfig;
use pmtk::error::Error;
use pmtk::metrics::FAMILIES;
use pmtk::output::{write_outputs, RECORDS_FILE};
use pmtk::record::ConvergenceRecord;
use pmtk::report::render;
use pmtk::table::convergence_table;

/// Mass, harmonic-coordinate and mass-estimate experiments on asymptotically
/// flat half-spaces.
#[derive(Parser)]
#[command(name = "pmtk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "PMTK_WORKERS")]
    workers: Option<usize>,
    /// Print nothing but errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and write its record and reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the file's `output` or `pmtk-out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace every grid size, e.g. `32,24,48`.
        #[arg(long, value_parser = parse_nodes)]
        resolution_override: Option<[usize; 3]>,
    },
    /// Print convergence tables from a records file.
    Table {
        /// Records file; defaults to `records.jsonl` in `--out`.
        records: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only the latest record with this name.
        #[arg(long)]
        name: Option<String>,
    },
    /// List the metric families an experiment file can name.
    ListMetrics,
    /// Print the configuration schema with defaults, or a parsed file with
    /// defaults filled in.
    DescribeConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn parse_nodes(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<usize>| format!("expected three node counts, got {}", v.len()))
}

const SCHEMA: &str = r#"# Experiment file (TOML). Values shown are defaults; `<...>` is required.
name = "<file-name-safe string>"
kind = "<mass-study | solver-convergence | inequality | full-suite | derivative-check | scale-covariance>"
seed = 0
# output = "pmtk-out"

[metric]
family = "<flat | half-schwarzschild | conformal-superposition | perturbed-flat>"
# m = 1.0                                   half-schwarzschild
# bubbles = [{ mass = 1.0, center = [2.0, 0.0, 0.0], core = 0.0 }]
# mirror = true                             conformal-superposition
# amplitude = 0.05, tau = 0.8, seed = 7     perturbed-flat
# scale = 2.0                               pull back by x -> x / scale

[mass]
shapes = ["hemisphere"]                     # hemisphere | sphere | half-cylinder
# radii = [20.0, 40.0, 80.0, 160.0]         default max(20, 4 reach) 2^k, k < 4
quadrature = 1024

[solver]
truncation = { shape = "<shell | box>", r_out = 10.0 }   # box: half_width, height, stretch
resolutions = [[16, 12, 24], [32, 24, 48], [64, 48, 96]]
tolerance = 1e-10
levels = []                                 # empty: five interior levels
checks = ["residual-order", "min-gradient", "identity-order", "coarea", "levels", "negative-control", "bulk-stability"]
dump = false

[inequality]
truncation = { shape = "shell", r_out = 40.0 }
nodes = [64, 48, 96]
tolerance = 1e-10
quadrature = 1024
energy_samples = 10000

[derivatives]
points = 1000
extent = 8.0
step = 0.01
margin = 1.5
also = []                                   # further [metric] tables

[scale]
factor = 2.0
truncation = { shape = "shell", r_out = 40.0 }
nodes = [32, 24, 48]
tolerance = 1e-10
quadrature = 1024

[verdicts]
mass = 5e-4
finite_radius = 1e-6
exhaustion = 1e-3
exhaustion_within_fit = false
residual_order = 1.8
gradient_stability = 0.02
identity_order = 1.0
coarea = 0.02
bulk_stability = 0.02
tolerance_fraction = 0.05
flat_mass = 1e-8
flat_integral = 1e-10
flat_field = 1e-8
derivative_order = 1.9
derivative_defect = 1e-10
scale_mass = 1e-3
scale_rhs = 0.05
# max_seconds = 300
"#;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let code = match execute(cli.command, cli.global.quiet) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(command: Command, quiet: bool) -> Result<i32, Error> {
    match command {
        Command::Run {
            config,
            out,
            resolution_override,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(n) = resolution_override {
                cfg.override_resolution(n);
                cfg.validate().map_err(|e| e.in_file(&config))?;
            }
            let dir = out
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("pmtk-out"));
            let result = pmtk::run(&cfg)?;
            let files = write_outputs(&dir, &result)?;
            if !quiet {
                print!("{}", render(&result.record));
                for f in files {
                    println!("wrote {}", f.display());
                }
            }
            Ok(result.record.exit_code())
        }
        Command::Table { records, out, name } => {
            let path = records.unwrap_or_else(|| {
                out.unwrap_or_else(|| PathBuf::from("pmtk-out")).join(RECORDS_FILE)
            });
            let tables = tables(&path, name.as_deref())?;
            if tables.is_empty() {
                return Err(Error::config("records", "no record with a resolution ladder"));
            }
            if !quiet {
                for (n, t) in tables {
                    println!("# {n}");
                    print!("{t}");
                }
            }
            Ok(0)
        }
        Command::ListMetrics => {
            if !quiet {
                for f in FAMILIES {
                    println!("{:<24} {:<44} {}", f.name, f.parameters, f.summary);
                }
            }
            Ok(0)
        }
        Command::DescribeConfig { config } => {
            let text = match config {
                Some(p) => ExperimentConfig::load(&p)?.to_toml(),
                None => SCHEMA.to_string(),
            };
            if !quiet {
                print!("{text}");
            }
            Ok(0)
        }
    }
}

/// `(name, table)` for every record carrying a convergence ladder, latest
/// per name.
fn tables(path: &Path, only: Option<&str>) -> Result<Vec<(String, String)>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut latest: Vec<(String, String)> = Vec::new();
    for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), k + 1)))?;
        let name = v["name"].as_str().unwrap_or("").to_string();
        if only.is_some_and(|n| n != name) {
            continue;
        }
        let Some(c) = v.get("convergence") else { continue };
        let c: ConvergenceRecord = serde_json::from_value(c.clone())
            .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), k + 1)))?;
        latest.retain(|(n, _)| *n != name);
        latest.push((name, convergence_table(&c)));
    }
    Ok(latest)
}
