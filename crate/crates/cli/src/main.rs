use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use rado_core::diophantine::LinearEquation;
use rado_core::oracle::monochromatic_solutions;
use rado_core::process::SolverCommand;
use rado_core::prover::{check_concrete, enumerate_cases, ColoringRecord, Prover, ProverConfig, Status};
use rado_core::sat::{emit_dimacs, encode};
use rado_core::search::{compute_rado, RadoOutcome, SatSolver, SearchError, Strategy, DEFAULT_N_MAX, DEFAULT_SAT_COMMAND};
use rado_core::smt::{SmtSolver, DEFAULT_SMT_COMMAND};
use rado_core::symset::ColoringSpec;
use rado_core::{Bindings, Int, Symbol};

const DEFAULT_TIMEOUT: u64 = 60;

const OK: u8 = 0;
const REFUTED: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "rado", version, about = "Rado numbers by SAT search, and verification of lower-bound colorings")]
struct Cli {
    /// TOML config file; defaults to $RADO_CONFIG, then ./rado.toml if present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Keep every solver input in this directory.
    #[arg(long, global = true, value_name = "DIR")]
    keep_artifacts: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the DIMACS instance for a k-coloring of [1, n].
    Encode {
        equation: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        no_symmetry: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute the k-color Rado number.
    Rado {
        equation: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Linear)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        #[arg(long)]
        no_symmetry: bool,
        /// Per-probe SAT timeout in seconds.
        #[arg(long)]
        timeout: Option<u64>,
        #[arg(long)]
        sat_command: Option<String>,
        /// Print the full JSON record instead of the value.
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify a coloring spec: partition checks and every monochromatic case.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Per-query SMT timeout in seconds.
        #[arg(long)]
        timeout: Option<u64>,
        #[arg(long)]
        smt_command: Option<String>,
        /// Report each check as it finishes.
        #[arg(long)]
        progress: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Instantiate a spec at concrete parameters and check the coloring.
    Instantiate {
        spec: PathBuf,
        /// Parameter binding such as `a=7`; repeatable.
        #[arg(long, value_parser = parse_binding)]
        bind: Vec<(String, i64)>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List the monochromatic cases of a spec without solving them.
    Cases { spec: PathBuf },
    /// Search a concrete coloring for monochromatic solutions.
    CheckColoring {
        coloring: PathBuf,
        /// Overrides the equation stored in the coloring file.
        equation: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Linear,
    Geometric,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    smt: SolverSection,
    #[serde(default)]
    sat: SolverSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    command: Option<String>,
    timeout: Option<u64>,
}

/// Solver command and timeout after flags, environment and file are merged.
#[derive(Debug)]
struct Settings {
    smt_command: String,
    smt_timeout: u64,
    sat_command: String,
    sat_timeout: u64,
}

fn load_settings(path: Option<&Path>) -> Result<Settings> {
    let path = path.map(Path::to_path_buf).or_else(|| std::env::var_os("RADO_CONFIG").map(PathBuf::from));
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
        }
        None if Path::new("rado.toml").exists() => {
            toml::from_str(&std::fs::read_to_string("rado.toml")?).context("parsing rado.toml")?
        }
        None => ConfigFile::default(),
    };
    let env_str = |k: &str| std::env::var(k).ok().filter(|v| !v.trim().is_empty());
    let env_u64 = |k: &str| -> Result<Option<u64>> {
        env_str(k).map(|v| v.trim().parse().with_context(|| format!("{k} must be a whole number of seconds"))).transpose()
    };
    Ok(Settings {
        smt_command: env_str("RADO_SMT_COMMAND").or(file.smt.command).unwrap_or_else(|| DEFAULT_SMT_COMMAND.into()),
        smt_timeout: env_u64("RADO_SMT_TIMEOUT")?.or(file.smt.timeout).unwrap_or(DEFAULT_TIMEOUT),
        sat_command: env_str("RADO_SAT_COMMAND").or(file.sat.command).unwrap_or_else(|| DEFAULT_SAT_COMMAND.into()),
        sat_timeout: env_u64("RADO_SAT_TIMEOUT")?.or(file.sat.timeout).unwrap_or(DEFAULT_TIMEOUT),
    })
}

fn parse_binding(s: &str) -> Result<(String, i64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v = v.trim().parse().map_err(|_| format!("`{v}` is not an integer"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_equation(s: &str) -> Result<LinearEquation> {
    s.parse().map_err(|e| anyhow!("{e}"))
}

fn load_spec(path: &Path) -> Result<ColoringSpec<Int>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ColoringSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, format!("{text}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Errors raised before any solving are usage or config errors.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn run(cli: Cli) -> Result<u8, Usage> {
    let settings = load_settings(cli.config.as_deref())?;
    let keep = cli.keep_artifacts.clone();
    match cli.command {
        Command::Encode { equation, n, k, no_symmetry, output } => {
            let eq = parse_equation(&equation)?;
            let inst = encode(&eq, n, k, !no_symmetry)?;
            let text = emit_dimacs(&inst);
            match output {
                Some(p) => std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(OK)
        }
        Command::Rado { equation, k, strategy, n_max, no_symmetry, timeout, sat_command, json, output } => {
            let eq = parse_equation(&equation)?;
            let command = sat_command.unwrap_or(settings.sat_command);
            let timeout = Duration::from_secs(timeout.unwrap_or(settings.sat_timeout));
            let solver = SatSolver { command: SolverCommand::new(&command, timeout).keep_artifacts(keep), symmetry: !no_symmetry };
            let strategy = match strategy {
                StrategyArg::Linear => Strategy::Linear,
                StrategyArg::Geometric => Strategy::Geometric,
            };
            let record = match compute_rado(&eq, k, strategy, n_max, &solver) {
                Ok(r) => r,
                Err(SearchError::Launch(e)) => return Err(e.into()),
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(INCONCLUSIVE);
                }
            };
            let full = serde_json::to_string_pretty(&record)?;
            if let Some(p) = &output {
                emit(&full, Some(p))?;
            }
            if json {
                println!("{full}");
            }
            Ok(match &record.outcome {
                RadoOutcome::Value { r } => {
                    if !json {
                        println!("{r}");
                    }
                    OK
                }
                RadoOutcome::ExceedsCap { n_max, hint } => {
                    eprintln!("no value up to {n_max}; {hint}");
                    INCONCLUSIVE
                }
                RadoOutcome::Inconclusive { at, last_sat, first_unsat } => {
                    let hi = first_unsat.map_or("?".to_string(), |u| u.to_string());
                    eprintln!("solver gave no answer at n = {at}; value lies in ({last_sat}, {hi}]");
                    INCONCLUSIVE
                }
            })
        }
        Command::Verify { spec, jobs, timeout, smt_command, progress, output } => {
            let spec = load_spec(&spec)?;
            let command = smt_command.unwrap_or(settings.smt_command);
            let timeout = Duration::from_secs(timeout.unwrap_or(settings.smt_timeout));
            let solver = SmtSolver::new(SolverCommand::new(&command, timeout).keep_artifacts(keep));
            let mut config = ProverConfig::new(solver);
            config.jobs = jobs;
            config.progress = progress;
            let report = Prover::new(&spec, config).verify();
            emit(&serde_json::to_string_pretty(&report)?, output.as_deref())?;
            let s = &report.summary;
            eprintln!(
                "{}: {} of {} cases unsat, {} sat, {} inconclusive; bound {}",
                if report.verified { "verified" } else { "not verified" },
                s.unsat,
                s.cases,
                s.sat,
                s.inconclusive,
                report.bound
            );
            for c in report.partition.iter().filter(|c| c.status != Status::Passed) {
                eprintln!("  {:?} {}: {}", c.status, c.name, c.detail);
            }
            let refuted = s.sat > 0 || report.partition.iter().any(|c| c.status == Status::Failed);
            Ok(if report.verified {
                OK
            } else if refuted {
                REFUTED
            } else {
                INCONCLUSIVE
            })
        }
        Command::Instantiate { spec, bind, output } => {
            let spec = load_spec(&spec)?;
            let env: Bindings<Int> = bind.into_iter().map(|(k, v)| (Symbol::new(&k), v as Int)).collect();
            for s in &spec.symbols {
                if !env.contains_key(s) {
                    return Err(anyhow!("missing --bind for `{s}`").into());
                }
            }
            if !spec.asm.satisfied_by(&env)? {
                return Err(anyhow!("the bindings violate the spec's assumptions").into());
            }
            let (check, colors) = check_concrete(&spec, &env)?;
            if !check.clean {
                eprintln!("{}", serde_json::to_string_pretty(&check)?);
                return Ok(REFUTED);
            }
            let record = ColoringRecord {
                equation: check.equation,
                parameters: check.parameters,
                classes: spec.classes.iter().map(|c| c.name.clone()).collect(),
                colors,
            };
            emit(&serde_json::to_string(&record)?, output.as_deref())?;
            Ok(OK)
        }
        Command::Cases { spec } => {
            let spec = load_spec(&spec)?;
            for c in enumerate_cases(&spec) {
                println!("{} {} {}", c.id, c.class, c.sets.join(" "));
            }
            Ok(OK)
        }
        Command::CheckColoring { coloring, equation } => {
            let text = std::fs::read_to_string(&coloring).with_context(|| format!("reading {}", coloring.display()))?;
            let record: ColoringRecord = serde_json::from_str(&text).context("parsing coloring")?;
            let eq = parse_equation(equation.as_deref().unwrap_or(&record.equation))?;
            let found = monochromatic_solutions(&record.colors, &eq);
            match found.first() {
                None => {
                    println!("no monochromatic solution of {eq} in [1, {}]", record.n());
                    Ok(OK)
                }
                Some(w) => {
                    println!("{} monochromatic solutions of {eq}, first {w:?}", found.len());
                    Ok(REFUTED)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}
