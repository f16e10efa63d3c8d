use std::path::PathBuf;

use adia_core::criterion::{counterexample_search, run_experiment, ExperimentConfig, TSweep, Verdict};
use adia_core::spectral::PartialSums;
use adia_core::{
    build_hi, build_hp, condition_scan, eigendecompose, interpolate, partial_sum_probe, recurrence_residual, Params,
    Space, C64,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{self, parse_complex, BoundarySection, ComplexText, Scheme};
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::output;

#[derive(Debug, Parser)]
#[command(name = "adia", version, about = "Adiabatic identification-criterion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full experiment described by a config file.
    Run(RunArgs),
    /// Scan eigenpair matrix elements of H_P - H_I over s.
    Scan(ScanArgs),
    /// Randomized search for runs where an excited label ends above 1/2.
    Search(SearchArgs),
    /// Recurrence residual and partial sums for one eigenvector at one s.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "adia-out")]
    pub out: PathBuf,
    /// Exit with status 3 unless the verdict is a match.
    #[arg(long)]
    pub assert_match: bool,
    /// Print the canonical config and exit without running.
    #[arg(long)]
    pub dump_config: bool,
}

/// A single problem given either as a config file or inline.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long, conflicts_with_all = ["poly", "num_vars", "alpha", "nmax", "bc", "c"])]
    pub config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    pub poly: Option<String>,
    #[arg(long)]
    pub num_vars: Option<usize>,
    /// Coherent parameter, once per mode (`a+bi`).
    #[arg(long, value_parser = parse_complex, required_unless_present = "config")]
    pub alpha: Vec<C64>,
    #[arg(long, required_unless_present = "config")]
    pub nmax: Option<usize>,
    #[arg(long, value_enum)]
    pub bc: Option<Scheme>,
    /// Wrap coefficient for periodic and antiperiodic schemes.
    #[arg(long, value_parser = parse_complex)]
    pub c: Option<C64>,
}

impl ProblemArgs {
    fn resolve(&self, grid: Option<usize>) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => config::load_experiment(path)?,
            None => {
                let boundary = BoundarySection { scheme: self.bc.unwrap_or(Scheme::Abrupt), c: self.c.map(ComplexText) };
                let config = ExperimentConfig {
                    polynomial: self.poly.clone().unwrap_or_default(),
                    num_vars: self.num_vars,
                    alphas: self.alpha.clone(),
                    cutoff: self.nmax.unwrap_or_default(),
                    boundary: boundary.resolve().map_err(CliError::Usage)?,
                    t_sweep: TSweep { t0: 1.0, ratio: 2.0, count: 8 },
                    steps_per_unit_time: 20.0,
                    scan_grid: 19,
                    seed: 0,
                    initial_state: Default::default(),
                };
                config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
                config
            }
        };
        if let Some(g) = grid {
            config.scan_grid = g;
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Interior grid points; defaults to the config's scan_grid.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value = "adia-out")]
    pub out: PathBuf,
    /// Write every pair to the CSV instead of the per-s minimum.
    #[arg(long)]
    pub all_pairs: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "adia-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub eigenindex: usize,
    /// Partial sums run over n < upto; defaults to the basis dimension.
    #[arg(long)]
    pub upto: Option<usize>,
    /// Also write probe.json and a manifest into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs one parsed command line.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(&args),
        Command::Scan(args) => scan(&args),
        Command::Search(args) => search(&args),
        Command::Probe(args) => probe(&args),
    }
}

fn run(args: &RunArgs) -> Result<()> {
    let config = config::load_experiment(&args.config)?;
    let canonical = config::canonical_toml(&config)?;
    if args.dump_config {
        print!("{canonical}");
        return Ok(());
    }
    let report = run_experiment::<f64>(&config)?;
    let out = &args.out;
    let mut outputs = vec![out.join("config.toml"), out.join("report.json"), out.join("probabilities.csv")];
    output::write_text(&outputs[0], &canonical)?;
    output::write_json(&outputs[1], &report)?;
    output::write_probabilities(&outputs[2], &report)?;
    if let Some(scan) = &report.scan {
        let path = out.join("condition_scan.csv");
        output::write_scan(&path, scan, false)?;
        outputs.push(path);
    }
    let manifest = RunManifest::new("run", config::digest(&canonical), outputs).write(out)?;

    println!("ground label {} (energy {})", report.label_string(report.ground_index), report.ground_energy);
    for row in &report.sweep {
        let identified = row.identified.map_or("-".to_string(), |i| report.label_string(i));
        println!("T = {:<10} identified {:<8} p_ground {:.6}  {:?}", row.t, identified, row.ground_probability, row.verdict);
    }
    println!("verdict {:?}, solution {:?}", report.verdict, report.solution);
    if let Some(scan) = &report.scan {
        if scan.violated() {
            println!("scan: smallest element {:e} is below the vanishing threshold", scan.global_min.as_ref().map_or(0.0, |g| g.value));
        }
    }
    println!("wrote {}", manifest.display());
    if args.assert_match && report.verdict != Verdict::Match {
        return Err(CliError::NotMatched(format!("{:?}", report.verdict)));
    }
    Ok(())
}

struct Problem {
    config: ExperimentConfig,
    space: Space,
    params: Params,
    poly: adia_core::DiophantinePolynomial,
    hi: adia_core::Operator,
    hp: adia_core::Operator,
}

fn build(config: ExperimentConfig) -> Result<Problem> {
    let poly = config.validate()?;
    let space = Space::uniform(poly.num_vars(), config.cutoff, config.boundary)?;
    let params = Params::new(config.alphas.clone())?;
    let hi = build_hi(&space, &params)?;
    let hp = build_hp(&space, &poly)?;
    Ok(Problem { config, space, params, poly, hi, hp })
}

fn scan(args: &ScanArgs) -> Result<()> {
    let p = build(args.problem.resolve(args.grid)?)?;
    if p.config.scan_grid == 0 {
        return Err(CliError::Usage("scan grid must have at least one point".into()));
    }
    let report = condition_scan(&p.hi, &p.hp, p.config.scan_grid)?;
    let csv = args.out.join("condition_scan.csv");
    let json = args.out.join("scan.json");
    output::write_scan(&csv, &report, args.all_pairs)?;
    output::write_json(&json, &report)?;
    let manifest = RunManifest::new("scan", config::config_hash(&p.config)?, vec![csv, json]).write(&args.out)?;

    println!("dimension {}, grid {}, |[H_I, H_P]|_F = {:e}", p.space.dimension(), report.grid.len(), report.commutator_norm);
    match &report.global_min {
        Some(g) => println!("smallest element {:e} at s = {} between eigenpairs ({}, {})", g.value, g.s, g.pair_i, g.pair_j),
        None => println!("every pair is degenerate on the grid"),
    }
    if let Some(gap) = report.min_gap() {
        println!("minimum gap {gap:e}");
    }
    println!("vanishing threshold {:e}: {}", report.violation_threshold(), if report.violated() { "violated" } else { "clear" });
    println!("wrote {}", manifest.display());
    Ok(())
}

fn search(args: &SearchArgs) -> Result<()> {
    let cfg = config::load_search(&args.config)?;
    let report = counterexample_search(cfg.dimension, cfg.trials, cfg.seed, cfg.boundary, &cfg.options)?;
    let out = &args.out;
    let mut outputs = vec![out.join("search_report.json"), out.join("search_hits.csv")];
    output::write_json(&outputs[0], &report)?;
    output::write_search_hits(&outputs[1], &report)?;
    for hit in &report.hits {
        let path = out.join("hits").join(format!("trial-{}.toml", hit.trial));
        output::write_text(&path, &config::canonical_toml(&hit.config)?)?;
        outputs.push(path);
    }
    let manifest = RunManifest::new("search", cfg.hash, outputs).write(out)?;

    println!(
        "{} trials: {} evaluated, {} degenerate, {} premise violations, {} failed",
        report.trials, report.evaluated, report.skipped_degenerate, report.skipped_premise, report.failed
    );
    println!("{} hits, {} confirmed at {}x step density", report.hits.len(), report.confirmed_hits(), adia_core::criterion::CONFIRM_REFINEMENT);
    if cfg.boundary.is_wrapped() {
        for hit in report.hits.iter().filter(|h| h.confirmed) {
            eprintln!(
                "CRITICAL FINDING: trial {} ({}, T = {}) puts label {:?} at p = {}",
                hit.trial, hit.config.polynomial, hit.t, hit.violating_label, hit.probability
            );
        }
    }
    println!("wrote {}", manifest.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct PartnerSums {
    partner: usize,
    energy_gap: f64,
    #[serde(flatten)]
    sums: PartialSums<f64>,
}

#[derive(Debug, Serialize)]
struct ProbeReport {
    s: f64,
    eigenindex: usize,
    energy: f64,
    hamiltonian_norm: f64,
    max_residual: f64,
    recurrence_residual: Vec<f64>,
    upto: usize,
    partial_sums: Vec<PartnerSums>,
}

fn probe(args: &ProbeArgs) -> Result<()> {
    let p = build(args.problem.resolve(None)?)?;
    let h = interpolate(&p.hi, &p.hp, args.s)?;
    let sys = eigendecompose(&h)?;
    if args.eigenindex >= sys.dim() {
        return Err(adia_core::Error::EigenIndex { index: args.eigenindex, dimension: sys.dim() }.into());
    }
    let residual = recurrence_residual(&sys, args.eigenindex, args.s, &p.params, &p.poly, &p.space)?;
    let upto = args.upto.unwrap_or(sys.dim());
    let partial_sums = (0..sys.dim())
        .filter(|&j| j != args.eigenindex)
        .map(|j| {
            Ok(PartnerSums {
                partner: j,
                energy_gap: sys.energies[j] - sys.energies[args.eigenindex],
                sums: partial_sum_probe(&sys, (args.eigenindex, j), &p.poly, upto)?,
            })
        })
        .collect::<adia_core::Result<_>>()?;
    let report = ProbeReport {
        s: args.s,
        eigenindex: args.eigenindex,
        energy: sys.energies[args.eigenindex],
        hamiltonian_norm: h.frobenius_norm(),
        max_residual: residual.iter().copied().fold(0.0, f64::max),
        recurrence_residual: residual,
        upto,
        partial_sums,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &args.out {
        let json = out.join("probe.json");
        output::write_json(&json, &report)?;
        RunManifest::new("probe", config::config_hash(&p.config)?, vec![json]).write(out)?;
    }
    Ok(())
}

/// Caps the global worker pool from `ADIA_THREADS`, if set.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(value) = value else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("ADIA_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

