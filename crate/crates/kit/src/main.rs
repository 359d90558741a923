use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qnr_core::bnb::{solve_global, BnbOptions, Clock, Limits, SolveReport};
use qnr_core::generators::{generate, Family, GenConfig};
use qnr_core::mccormick::{build_mcr, relaxation_bound};
use qnr_core::reformulate::{reformulate, ReformOptions, Reformulation};
use qnr_core::sdp::IterLog;
use qnr_core::{classify_convexity, QcqpInstance};
use qnr_kit::bench::{self, BenchConfig};
use qnr_kit::io::{read_instance, write_instance};
use qnr_kit::lp_format::export_lp;
use qnr_kit::WallClock;

/// Quadratic nonconvex reformulation toolkit.
#[derive(Parser)]
#[command(name = "qnr", version)]
struct Cli {
    /// Log at info level (progress lines, fallbacks).
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Generate {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute reformulation parameters and write the reformulated instance.
    Reformulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        conic: ConicArgs,
    },
    /// Print root bounds: plain McCormick, conic, and reformulated McCormick.
    Bound {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        conic: ConicArgs,
    },
    /// Solve to global optimality by spatial branch-and-bound.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Reformulate first and solve the reformulated model.
        #[arg(long)]
        qnr: bool,
        #[command(flatten)]
        limits: LimitArgs,
        /// Progress line every this many nodes (0 disables).
        #[arg(long, default_value_t = 0)]
        log_stride: usize,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the plain-versus-reformulated benchmark over a seed range.
    Bench {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        /// First seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Number of consecutive seeds.
        #[arg(long, default_value_t = 5)]
        count: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = "bench-out")]
        out_dir: PathBuf,
        #[command(flatten)]
        limits: LimitArgs,
        /// Zero timing columns and ignore the time limit; output then
        /// depends only on the configuration.
        #[arg(long)]
        deterministic: bool,
        /// Hard StQP: identity scaling and permutation.
        #[arg(long)]
        unit_scaling: bool,
    },
    /// Export an instance (or its reformulation) in LP format.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        qnr: bool,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 1e-4)]
    rel_tol: f64,
    /// Seconds.
    #[arg(long, default_value_t = 1200.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1_000_000)]
    node_limit: usize,
}

#[derive(Args)]
struct ConicArgs {
    /// Write the conic solver's residual log as CSV.
    #[arg(long)]
    admm_log: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: qnr_core::Error| e.to_string())
}

fn reform(inst: &QcqpInstance, conic: &ConicArgs) -> Result<Reformulation> {
    let mut opts = ReformOptions::default();
    opts.cut.settings.log = conic.admm_log.is_some();
    let r = reformulate(inst, &opts).context("reformulation failed")?;
    if let Some(path) = &conic.admm_log {
        write_admm_log(&r.sdp.log, path)?;
    }
    Ok(r)
}

fn write_admm_log(log: &[IterLog], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["iter", "primal_res", "dual_res", "gap", "primal_obj", "dual_obj", "dual_bound"])?;
    for l in log {
        w.write_record([
            l.iter.to_string(),
            l.primal_res.to_string(),
            l.dual_res.to_string(),
            l.gap.to_string(),
            l.primal_obj.to_string(),
            l.dual_obj.to_string(),
            l.dual_bound.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn print_reform(r: &Reformulation) {
    println!("conic status: {}", r.sdp.status.as_str());
    println!("conic bound: {}", r.sdp.bound());
    println!("iterations: {}", r.sdp.iterations);
    println!("parameters: {}", r.params.provenance.as_str());
    println!("auxiliaries: {}", r.params.aux_count);
    println!("cells: {}", r.cells.len());
    for note in &r.notes {
        println!("note: {note}");
    }
}

fn mcr_bound(inst: &QcqpInstance) -> Result<f64> {
    let model = build_mcr(inst, &classify_convexity(inst, qnr_core::instance::EIG_TOL)?)?;
    Ok(relaxation_bound(&model).bound)
}

fn print_report(rep: &SolveReport) {
    println!("status: {}", rep.status);
    match rep.incumbent {
        Some(v) => println!("incumbent: {v}"),
        None => println!("incumbent: none"),
    }
    println!("best bound: {}", rep.best_bound);
    println!("root bound: {}", rep.root_bound);
    println!("gap: {}", rep.gap);
    println!("nodes: {}", rep.nodes);
    println!("elapsed: {:.3} s", rep.elapsed);
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = if cli.verbose || matches!(cli.command, Command::Solve { log_stride: 1.., .. }) { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match cli.command {
        Command::Generate { family, n, m, density, seed, out } => {
            let inst = generate(&GenConfig { family, n, m, density, seed })?;
            write_instance(&inst, &out)?;
            println!("wrote {} ({} n={} m={})", out.display(), inst.kind.as_str(), inst.n, inst.m());
        }
        Command::Reformulate { input, out, conic } => {
            let inst = read_instance(&input)?;
            let r = reform(&inst, &conic)?;
            print_reform(&r);
            write_instance(&r.qnr, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Bound { input, conic } => {
            let inst = read_instance(&input)?;
            let r = reform(&inst, &conic)?;
            if !inst.has_finite_bounds() {
                for i in 0..r.standard.n {
                    println!("x{i} in [{}, {}]", r.standard.lb[i], r.standard.ub[i]);
                }
            }
            let plain = if inst.has_finite_bounds() { &inst } else { &r.standard };
            println!("plain McCormick bound: {}", mcr_bound(plain)?);
            print_reform(&r);
            println!("reformulated McCormick bound: {}", mcr_bound(&r.qnr)?);
        }
        Command::Solve { input, qnr, limits, log_stride, out } => {
            let inst = read_instance(&input)?;
            let opts = BnbOptions {
                rel_tol: limits.rel_tol,
                limits: Limits { node_limit: limits.node_limit, time_limit: limits.time_limit },
                log_stride,
                ..Default::default()
            };
            let clock = WallClock::start();
            let (rep, point) = if qnr {
                let r = reform(&inst, &ConicArgs { admm_log: None })?;
                print_reform(&r);
                let rep = solve_global(&r.qnr, &opts, &clock as &dyn Clock)?;
                let point = rep.point.as_ref().map(|y| r.to_standard(y)[..inst.n].to_vec());
                (rep, point)
            } else {
                if !inst.has_finite_bounds() {
                    bail!("instance has unbounded variables; solve with --qnr (which derives a box) or add bounds");
                }
                let rep = solve_global(&inst, &opts, &clock as &dyn Clock)?;
                let point = rep.point.clone();
                (rep, point)
            };
            print_report(&rep);
            if let Some(x) = &point {
                println!("x: {:?}", x);
            }
            if let Some(path) = out {
                let doc = serde_json::json!({
                    "status": rep.status.as_str(),
                    "incumbent": rep.incumbent,
                    "x": point,
                    "root_bound": rep.root_bound,
                    "best_bound": rep.best_bound,
                    "gap": rep.gap,
                    "nodes": rep.nodes,
                    "elapsed": rep.elapsed,
                });
                std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
            }
        }
        Command::Bench { family, n, m, density, seed, count, jobs, out_dir, limits, deterministic, unit_scaling } => {
            let cfg = BenchConfig {
                family,
                n,
                m,
                density,
                seeds: (seed..seed + count).collect(),
                rel_tol: limits.rel_tol,
                time_limit: limits.time_limit,
                node_limit: limits.node_limit,
                jobs,
                deterministic,
                unit_scaling,
            };
            let rows = bench::run_benchmark(&cfg);
            bench::write_reports(&cfg, &rows, &out_dir)?;
            print!("{}", bench::report_markdown(&cfg, &rows));
        }
        Command::Export { input, out, qnr } => {
            let inst = read_instance(&input)?;
            let model = if qnr { reform(&inst, &ConicArgs { admm_log: None })?.qnr } else { inst };
            if !model.has_finite_bounds() {
                log::warn!("exporting a model with infinite bounds");
            }
            export_lp(&model, &out).with_context(|| format!("cannot write {}", out.display()))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}
