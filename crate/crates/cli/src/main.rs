use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use planar_flp::checks::CheckLevel;
use planar_flp::generate::{generate, GenKind, GenParams};
use planar_flp::io::{parse_instance, serialize_instance};
use planar_flp::run::{run, verify, Mode, RunOptions, RunReport};
use planar_flp::FlInstance;

#[derive(Parser)]
#[command(
    name = "planar-flp",
    version,
    about = "Facility location on planar graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random planar instance.
    Generate(GenerateArgs),
    /// Solve an instance and print a JSON report.
    Run(RunArgs),
    /// Run the approximation pipeline with every check enabled; exits 1 on
    /// any failed check.
    Verify(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Grid,
    Wheel,
    DelaunayLike,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Grid rows.
    #[arg(long, default_value_t = 3)]
    rows: usize,
    /// Grid columns.
    #[arg(long, default_value_t = 3)]
    cols: usize,
    /// Rim vertices of a wheel, or point count of a delaunay-like graph.
    #[arg(long, default_value_t = 8)]
    size: usize,
    #[arg(long, default_value_t = 5)]
    clients: usize,
    #[arg(long, default_value_t = 3)]
    facilities: usize,
    #[arg(long, default_value_t = 1.0)]
    open_min: f64,
    #[arg(long, default_value_t = 5.0)]
    open_max: f64,
    #[arg(long, default_value_t = 1)]
    max_mult: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Off,
    Fast,
    Full,
}

#[derive(Args)]
struct RunArgs {
    /// Instance file in planar-fl v1 format.
    input: PathBuf,
    #[arg(long, value_parser = parse_mode, default_value = "ptas")]
    mode: Mode,
    #[arg(long, default_value_t = 0.09)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    portal_spacing: Option<f64>,
    #[arg(long)]
    value_levels: Option<usize>,
    #[arg(long)]
    strict_constants: bool,
    /// Defaults to PLANAR_FLP_DEBUG_ASSERT.
    #[arg(long, value_enum)]
    verify_level: Option<Level>,
    #[arg(long)]
    subset_cap: Option<usize>,
    #[arg(long)]
    state_budget: Option<usize>,
    /// Skip the exact optimum even on small instances.
    #[arg(long)]
    no_oracle: bool,
    /// Include wall-clock stage timings (makes the report nondeterministic).
    #[arg(long)]
    timings: bool,
    /// Print a CSV summary row instead of JSON.
    #[arg(long)]
    csv: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse()
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        let level = match self.verify_level {
            Some(Level::Off) => CheckLevel::Off,
            Some(Level::Fast) => CheckLevel::Fast,
            Some(Level::Full) => CheckLevel::Full,
            None => CheckLevel::from_env(),
        };
        let d = RunOptions::default();
        RunOptions {
            mode: self.mode,
            eps: self.eps,
            seed: self.seed,
            strict: self.strict_constants,
            portal_spacing: self.portal_spacing,
            value_levels: self.value_levels,
            subset_cap: self.subset_cap.unwrap_or(d.subset_cap),
            state_budget: self.state_budget.unwrap_or(d.state_budget),
            level,
            oracle: !self.no_oracle,
            timings: self.timings,
            ..d
        }
    }
}

fn load(path: &Path) -> Result<FlInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render(report: &RunReport, csv: bool) -> String {
    if csv {
        format!("{}\n{}\n", RunReport::csv_header(), report.csv_row())
    } else {
        format!("{}\n", report.to_json())
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(a) => {
            let kind = match a.kind {
                Kind::Grid => GenKind::Grid {
                    rows: a.rows,
                    cols: a.cols,
                },
                Kind::Wheel => GenKind::Wheel { rim: a.size },
                Kind::DelaunayLike => GenKind::DelaunayLike { points: a.size },
            };
            let params = GenParams {
                open_min: a.open_min,
                open_max: a.open_max,
                max_mult: a.max_mult,
                ..GenParams::new(kind, a.clients, a.facilities)
            };
            let inst = generate(&params, a.seed)?;
            emit(&serialize_instance(&inst), a.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(a) => {
            let inst = load(&a.input)?;
            let report = run(&inst, &a.options())?;
            emit(&render(&report, a.csv), a.output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(a) => {
            let inst = load(&a.input)?;
            let report = verify(&inst, &a.options())?;
            emit(&render(&report, a.csv), a.output.as_deref())?;
            if report.checks.failed > 0 {
                for f in &report.checks.failures {
                    eprintln!("{f}");
                }
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
