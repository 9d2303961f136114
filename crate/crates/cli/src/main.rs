//! `ssr`: command-line driver for stacking-sequence retrieval experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ssr_core::harness::{
    bias_sweep, bias_sweep_weights, generate_targets, load_targets, read_records, render_table, run_buckling,
    run_matrix, summarize, write_targets, BiasSection, ExperimentConfig, Penalties, PenaltyPreset, ResultRecord,
    SolverFamily,
};

#[derive(Parser)]
#[command(name = "ssr", version, about = "Stacking-sequence retrieval experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config (TOML); defaults apply when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` from the config.
    #[arg(short, long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); overrides `parallelism`.
    #[arg(short = 'j', long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate target lamination parameters from random valid stacks.
    GenTargets(Common),
    /// Run the DMRG solvers of the config on every target.
    RunDmrg(Common),
    /// Run the F-VQE solvers and the buckling section of the config.
    RunFvqe(Common),
    /// Run beam search, GA and brute force solvers of the config.
    RunBaseline(Common),
    /// Sweep the clustering bias α with best-of-trials DMRG.
    BiasSweep(Common),
    /// Summarise result files.
    Report {
        /// JSONL result files.
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Directory for `summary.json`.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

struct Setup {
    cfg: ExperimentConfig,
    out: PathBuf,
}

fn setup(c: &Common) -> Result<Setup> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(j) = c.jobs {
        cfg.parallelism = j;
    }
    let out = c.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(Setup { cfg, out })
}

fn print_summary(records: &[ResultRecord]) -> Result<()> {
    if records.is_empty() {
        return Ok(());
    }
    print!("{}", render_table(&summarize(records)?));
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} runs failed; see the `error` field of the records", records.len());
    }
    Ok(())
}

fn run_family(c: &Common, family: SolverFamily, stem: &str) -> Result<()> {
    let s = setup(c)?;
    let records = run_matrix(&s.cfg, Some(family), &s.out, stem)?;
    eprintln!("wrote {} records to {}", records.len(), s.out.join(format!("{stem}.jsonl")).display());
    print_summary(&records)
}

fn run_fvqe(c: &Common) -> Result<()> {
    let s = setup(c)?;
    let has_lp = s.cfg.solvers.iter().any(|e| e.kind.family() == SolverFamily::Fvqe);
    if !has_lp && s.cfg.buckling.is_none() {
        bail!("config has neither an fvqe solver nor a [buckling] section");
    }
    let mut all = Vec::new();
    if has_lp {
        all.extend(run_matrix(&s.cfg, Some(SolverFamily::Fvqe), &s.out, "fvqe")?);
    }
    if s.cfg.buckling.is_some() {
        all.extend(run_buckling(&s.cfg, &s.out, "buckling")?);
    }
    eprintln!("wrote {} records to {}", all.len(), s.out.display());
    print_summary(&all)
}

fn gen_targets(c: &Common) -> Result<()> {
    let s = setup(c)?;
    let targets = load_targets(&s.cfg)?;
    let path = s.out.join("targets.toml");
    write_targets(&path, &targets)?;
    eprintln!("wrote {} targets to {}", targets.len(), path.display());
    Ok(())
}

fn run_bias(c: &Common) -> Result<()> {
    let s = setup(c)?;
    let section = s.cfg.bias.clone().unwrap_or_default();
    let BiasSection { plies, alphas, dmrg, penalties, instance } = section;
    let set = s.cfg.targets.angle_set.resolve()?;
    let targets = generate_targets(plies, instance + 1, &set, true, s.cfg.seed)?;
    let weights = match penalties {
        Penalties::Preset(PenaltyPreset::Auto) => bias_sweep_weights(plies),
        p => p.resolve(plies, true, PenaltyPreset::Dmrg),
    };
    let dmrg = ssr_core::tensornet::DmrgConfig { seed: s.cfg.seed, ..dmrg };
    let sweep = bias_sweep(&targets[instance], &alphas, &dmrg, weights)?;
    println!("{:>8} {:>10} {:>10} {:>6}", "alpha", "distance", "adjacent", "valid");
    for p in &sweep.points {
        println!("{:>8} {:>10.4} {:>10} {:>6}", p.alpha, p.distance, p.adjacent_equal_pairs, p.valid);
    }
    match sweep.spearman {
        Some(r) => println!("spearman(alpha, adjacent) = {r:.4}"),
        None => println!("spearman(alpha, adjacent) undefined (constant series)"),
    }
    let path = s.out.join("bias_sweep.json");
    std::fs::write(&path, serde_json::to_string_pretty(&sweep)?)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn report(records: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let mut all = Vec::new();
    for p in records {
        all.extend(read_records(p).with_context(|| format!("reading {}", p.display()))?);
    }
    if all.is_empty() {
        bail!("no records found");
    }
    let rows = summarize(&all)?;
    print!("{}", render_table(&rows));
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| records[0].parent().unwrap_or(Path::new(".")).to_path_buf());
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&rows)?)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::GenTargets(c) => gen_targets(c),
        Command::RunDmrg(c) => run_family(c, SolverFamily::Dmrg, "dmrg"),
        Command::RunFvqe(c) => run_fvqe(c),
        Command::RunBaseline(c) => run_family(c, SolverFamily::Baseline, "baseline"),
        Command::BiasSweep(c) => run_bias(c),
        Command::Report { records, out } => report(records, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
