//! Command-line front end: validate, compile, check coverage, train, and
//! dump oracle values or bounded languages.
//!
//! Standard output carries only CSV; diagnostics go to standard error. The
//! exit code is the machine-readable verdict (0 clean/covers, 1 violations or
//! not covering, 2 on errors).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::automaton::{Alphabet, Automaton};
use crate::coverage::{check_coverage, coverage_oracle, Verdict};
use crate::environment::{load_env, validate_env, RewardSpec};
use crate::error::{Error, Result};
use crate::format::{parse_aut, write_aut};
use crate::language::enumerate_language;
use crate::learner::{train, value_iteration_oracle, AlphaSchedule, LearnConfig};
use crate::report;
use crate::specification::{compile_spec, parse_spec_file, CompiledSpec, SpecPattern};

#[derive(Debug, Parser)]
#[command(name = "suprl", version, about = "Supervised tabular Q-learning over finite automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an environment automaton; exit 0 iff it has no violations.
    Validate {
        #[arg(long)]
        env: PathBuf,
    },
    /// Compile a `.spec` file into a specification automaton.
    CompileSpec {
        #[arg(long)]
        spec: PathBuf,
        /// Space-separated action labels; defaults to the labels of `--env`.
        #[arg(long, conflicts_with = "env")]
        alphabet: Option<String>,
        #[arg(long)]
        env: Option<PathBuf>,
        /// Output `.aut` path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a specification covers an environment; exit 0 iff it does.
    CheckCoverage {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        /// Also run the brute-force search with this length bound and report
        /// disagreements on standard error.
        #[arg(long)]
        oracle_len: Option<usize>,
    },
    /// Train a Q-table, optionally under a specification.
    Train(TrainArgs),
    /// Write `Q*` computed by value iteration.
    Oracle {
        #[arg(long)]
        env: PathBuf,
        #[command(flatten)]
        rewards: RewardArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the language of an automaton up to a length bound.
    Enumerate {
        #[arg(long)]
        aut: PathBuf,
        #[arg(long)]
        max_len: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RewardArgs {
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub step_reward: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub goal_reward: f64,
}

impl From<&RewardArgs> for RewardSpec {
    fn from(r: &RewardArgs) -> Self {
        RewardSpec {
            step_reward: r.step_reward,
            goal_reward: r.goal_reward,
            gamma: r.gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleKind {
    VisitCount,
    Constant,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub env: PathBuf,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 20_000)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    /// Constant learning rate; implies `--alpha-schedule constant`.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub alpha_schedule: Option<ScheduleKind>,
    #[command(flatten)]
    pub rewards: RewardArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_steps: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Number of consecutive seeds to run, starting at `--seed`. With more
    /// than one, each run writes to `<out>/seed-<n>/`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Everything a training run needs, resolved from the command line.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub env_path: PathBuf,
    pub spec_path: Option<PathBuf>,
    pub config: LearnConfig,
    pub rewards: RewardSpec,
    pub out_dir: PathBuf,
}

impl TrainArgs {
    fn schedule(&self) -> Result<AlphaSchedule> {
        match (self.alpha_schedule, self.alpha) {
            (Some(ScheduleKind::VisitCount), Some(_)) => Err(Error::Usage(
                "--alpha conflicts with --alpha-schedule visit-count".into(),
            )),
            (Some(ScheduleKind::Constant), None) => Err(Error::Usage(
                "--alpha-schedule constant needs --alpha".into(),
            )),
            (_, Some(a)) => Ok(AlphaSchedule::Constant(a)),
            _ => Ok(AlphaSchedule::VisitCount),
        }
    }

    pub fn manifests(&self) -> Result<Vec<RunManifest>> {
        let alpha = self.schedule()?;
        if self.seeds == 0 {
            return Err(Error::Usage("--seeds must be at least 1".into()));
        }
        Ok((0..self.seeds)
            .map(|k| {
                let seed = self.seed + k;
                RunManifest {
                    env_path: self.env.clone(),
                    spec_path: self.spec.clone(),
                    config: LearnConfig {
                        episodes: self.episodes,
                        max_steps: self.max_steps,
                        epsilon: self.epsilon,
                        alpha,
                        seed,
                    },
                    rewards: (&self.rewards).into(),
                    out_dir: if self.seeds == 1 {
                        self.out.clone()
                    } else {
                        self.out.join(format!("seed-{seed}"))
                    },
                }
            })
            .collect())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Include {
        path: path.to_path_buf(),
        source: Box::new(e.into()),
    })
}

fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { .. } => Error::Include {
            path: path.to_path_buf(),
            source: Box::new(e),
        },
        other => other,
    })
}

pub fn load_env_file(path: &Path) -> Result<Automaton> {
    in_file(path, load_env(&read(path)?))
}

/// Loads a specification from `.spec` source, or from an `.aut` file whose
/// states are all marked.
pub fn load_spec_file(path: &Path, alphabet: &Alphabet) -> Result<CompiledSpec> {
    let patterns = if path.extension().is_some_and(|e| e == "aut") {
        vec![SpecPattern::Explicit(path.to_path_buf())]
    } else {
        parse_spec_file(path, alphabet)?
    };
    compile_spec(&patterns, alphabet)
}

fn open_out(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Summary of one training run, for the diagnostics stream.
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub deadlocks: usize,
    pub step_caps: usize,
    pub unvisited: usize,
}

/// Executes one training manifest, writing `q.csv`, `returns.csv` and
/// `traces.log` into its output directory.
pub fn run_manifest(m: &RunManifest) -> Result<RunSummary> {
    let env = load_env_file(&m.env_path)?;
    let spec = match &m.spec_path {
        Some(p) => Some(load_spec_file(p, env.alphabet())?.automaton),
        None => None,
    };
    let outcome = train(&env, spec.as_ref(), &m.config, &m.rewards)?;
    fs::create_dir_all(&m.out_dir)?;
    report::write_q_csv(&outcome.q, env.alphabet(), open_out(&m.out_dir.join("q.csv"))?)?;
    report::write_returns_csv(&outcome.traces, m.rewards.gamma, open_out(&m.out_dir.join("returns.csv"))?)?;
    report::write_trace_log(&outcome.traces, env.alphabet(), open_out(&m.out_dir.join("traces.log"))?)?;
    let unvisited = env
        .states()
        .filter(|&s| !env.is_marked(s))
        .flat_map(|s| env.alphabet().ids().map(move |a| (s, a)))
        .filter(|&(s, a)| outcome.q.visits(s, a) == 0)
        .count();
    Ok(RunSummary {
        out_dir: m.out_dir.clone(),
        deadlocks: outcome.deadlocks,
        step_caps: outcome.step_caps,
        unvisited,
    })
}

/// Runs a parsed command. Returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Validate { env } => {
            let env = load_env_file(env)?;
            let violations = validate_env(&env);
            for v in &violations {
                writeln!(stderr, "violation: {v}")?;
            }
            Ok(if violations.is_empty() { 0 } else { 1 })
        }
        Command::CompileSpec {
            spec,
            alphabet,
            env,
            out,
        } => {
            let alphabet = match (alphabet, env) {
                (Some(labels), _) => Alphabet::new(labels.split_whitespace())?,
                (None, Some(env)) => load_env_file(env)?.alphabet().clone(),
                (None, None) => Alphabet::grid(),
            };
            let compiled = load_spec_file(spec, &alphabet)?;
            for w in &compiled.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            let text = write_aut(&compiled.automaton);
            match out {
                Some(path) => open_out(path)?.write_all(text.as_bytes())?,
                None => stdout.write_all(text.as_bytes())?,
            }
            writeln!(
                stderr,
                "states: {}, transitions: {}",
                compiled.automaton.state_count(),
                compiled.automaton.transition_count()
            )?;
            Ok(0)
        }
        Command::CheckCoverage {
            env,
            spec,
            oracle_len,
        } => {
            let env = load_env_file(env)?;
            let compiled = load_spec_file(spec, env.alphabet())?;
            for w in &compiled.warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            let report = check_coverage(&compiled.automaton, &env);
            report::write_coverage_csv(&report, &mut *stdout)?;
            writeln!(
                stderr,
                "{} uncovered state-action pairs; verdict: {}",
                report.uncovered.len(),
                report.verdict
            )?;
            if let Some(len) = oracle_len {
                let oracle = coverage_oracle(&compiled.automaton, &env, *len)?;
                if oracle.uncovered != report.uncovered {
                    writeln!(
                        stderr,
                        "bounded search (length {len}) disagrees: {} uncovered{}",
                        oracle.uncovered.len(),
                        if oracle.exact { "" } else { " (bound may be too small)" }
                    )?;
                } else {
                    writeln!(stderr, "bounded search (length {len}) agrees")?;
                }
            }
            Ok(if report.verdict == Verdict::Covers { 0 } else { 1 })
        }
        Command::Train(args) => {
            let manifests = args.manifests()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(args.jobs.max(1))
                .build()
                .map_err(|e| Error::Usage(e.to_string()))?;
            let results: Vec<Result<RunSummary>> =
                pool.install(|| manifests.par_iter().map(run_manifest).collect());
            for r in results {
                let s = r?;
                writeln!(
                    stderr,
                    "{}: {} deadlocks, {} step caps, {} unvisited non-goal pairs",
                    s.out_dir.display(),
                    s.deadlocks,
                    s.step_caps,
                    s.unvisited
                )?;
            }
            Ok(0)
        }
        Command::Oracle {
            env,
            rewards,
            tol,
            out,
        } => {
            let env = load_env_file(env)?;
            let q = value_iteration_oracle(&env, &rewards.into(), *tol)?;
            match out {
                Some(path) => report::write_q_csv(&q, env.alphabet(), open_out(path)?)?,
                None => report::write_q_csv(&q, env.alphabet(), &mut *stdout)?,
            }
            Ok(0)
        }
        Command::Enumerate { aut, max_len } => {
            let a = in_file(aut, parse_aut(&read(aut)?))?;
            let lang = enumerate_language(&a, *max_len)?;
            report::write_language_csv(&lang, &a, &mut *stdout)?;
            Ok(0)
        }
    }
}
