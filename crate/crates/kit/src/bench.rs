//! Plain-versus-reformulated benchmark runs and their reports.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use qnr_core::bnb::{solve_global, BnbOptions, Clock, Limits, NoClock, SolveReport, SolveStatus};
use qnr_core::generators::{gen_hard_stqp_with, generate, Family, GenConfig, HardStqpOverride};
use qnr_core::reformulate::{reformulate, ReformOptions};
use qnr_core::QcqpInstance;

use crate::WallClock;

pub const CSV_HEADER: [&str; 15] = [
    "id",
    "family",
    "n",
    "m",
    "rb_plain",
    "rb_qnr",
    "sdr",
    "opt",
    "gc",
    "nodes_plain",
    "nodes_qnr",
    "t_reform_ms",
    "t_plain_ms",
    "t_qnr_ms",
    "status",
];

/// `1 - (opt - rb_qnr) / (opt - rb_plain)`; `None` when the plain root bound
/// already reaches the optimum.
pub fn gap_closed(rb_plain: f64, rb_qnr: f64, opt: f64) -> Option<f64> {
    if rb_plain >= opt - 1e-12 {
        return None;
    }
    let gc = 1.0 - (opt - rb_qnr) / (opt - rb_plain);
    Some(if gc > 1.0 && gc <= 1.0 + 1e-9 { 1.0 } else { gc })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub density: f64,
    pub seeds: Vec<u64>,
    pub rel_tol: f64,
    pub time_limit: f64,
    pub node_limit: usize,
    pub jobs: usize,
    /// Report zero timings and ignore the time limit so output depends only
    /// on the configuration.
    pub deterministic: bool,
    /// Hard StQP only: identity scaling and permutation.
    pub unit_scaling: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            family: Family::HardStqp,
            n: 10,
            m: 1,
            density: 1.0,
            seeds: vec![1],
            rel_tol: 1e-4,
            time_limit: 1200.0,
            node_limit: 1_000_000,
            jobs: 1,
            deterministic: false,
            unit_scaling: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gc {
    Value(f64),
    /// The plain root bound already meets the optimum.
    RootExact,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub id: String,
    pub family: Family,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub rb_plain: Option<f64>,
    pub rb_qnr: Option<f64>,
    pub sdr: Option<f64>,
    pub opt: Option<f64>,
    /// Whether `opt` is a certified optimum rather than a best incumbent.
    pub opt_certified: bool,
    pub gc: Gc,
    pub nodes_plain: Option<usize>,
    pub nodes_qnr: Option<usize>,
    pub t_reform_ms: f64,
    pub t_plain_ms: f64,
    pub t_qnr_ms: f64,
    pub status: String,
}

impl BenchRow {
    fn empty(cfg: &BenchConfig, seed: u64) -> Self {
        Self {
            id: format!("{}-n{}-m{}-s{}", cfg.family.as_str(), cfg.n, cfg.m, seed),
            family: cfg.family,
            seed,
            n: cfg.n,
            m: cfg.m,
            rb_plain: None,
            rb_qnr: None,
            sdr: None,
            opt: None,
            opt_certified: false,
            gc: Gc::Unavailable,
            nodes_plain: None,
            nodes_qnr: None,
            t_reform_ms: 0.0,
            t_plain_ms: 0.0,
            t_qnr_ms: 0.0,
            status: String::new(),
        }
    }
}

pub fn instance_for(cfg: &BenchConfig, seed: u64) -> qnr_core::Result<QcqpInstance> {
    if cfg.family == Family::HardStqp && cfg.unit_scaling {
        let over = HardStqpOverride { unit_scaling: true, identity_permutation: true };
        return gen_hard_stqp_with(cfg.n, seed, over);
    }
    generate(&GenConfig { family: cfg.family, n: cfg.n, m: cfg.m, density: cfg.density, seed })
}

fn timed<T>(deterministic: bool, f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    let ms = if deterministic { 0.0 } else { start.elapsed().as_secs_f64() * 1e3 };
    (out, ms)
}

fn solve(inst: &QcqpInstance, cfg: &BenchConfig) -> qnr_core::Result<SolveReport> {
    let opts = BnbOptions {
        rel_tol: cfg.rel_tol,
        limits: Limits { node_limit: cfg.node_limit, time_limit: cfg.time_limit },
        ..Default::default()
    };
    if cfg.deterministic {
        solve_global(inst, &opts, &NoClock)
    } else {
        let clock = WallClock::start();
        solve_global(inst, &opts, &clock as &dyn Clock)
    }
}

/// Generates, reformulates and solves one instance both ways.
pub fn run_instance(cfg: &BenchConfig, seed: u64) -> BenchRow {
    match instance_for(cfg, seed) {
        Ok(inst) => run_on(cfg, seed, &inst),
        Err(e) => {
            let mut row = BenchRow::empty(cfg, seed);
            row.status = format!("error: generate: {e}");
            row
        }
    }
}

/// Reformulates and solves a given instance both ways.
pub fn run_on(cfg: &BenchConfig, seed: u64, inst: &QcqpInstance) -> BenchRow {
    let mut row = BenchRow::empty(cfg, seed);
    row.n = inst.n;
    row.m = inst.m();
    let mut notes: Vec<String> = Vec::new();
    let (reform, t) = timed(cfg.deterministic, || reformulate(inst, &ReformOptions::default()));
    row.t_reform_ms = t;
    let plain_inst = match &reform {
        Ok(r) => {
            row.sdr = Some(r.sdp.bound());
            if r.params.provenance != qnr_core::reformulate::Provenance::SdpOptimal {
                notes.push(format!("params:{}", r.params.provenance.as_str()));
            }
            if inst.has_finite_bounds() { inst.clone() } else { r.standard.clone() }
        }
        Err(e) => {
            notes.push(format!("error: reformulate: {e}"));
            inst.clone()
        }
    };

    let mut plain = None;
    if plain_inst.has_finite_bounds() {
        let (res, t) = timed(cfg.deterministic, || solve(&plain_inst, cfg));
        row.t_plain_ms = t;
        match res {
            Ok(r) => plain = Some(r),
            Err(e) => notes.push(format!("error: plain: {e}")),
        }
    }
    let mut qnr = None;
    if let Ok(r) = &reform {
        let (res, t) = timed(cfg.deterministic, || solve(&r.qnr, cfg));
        row.t_qnr_ms = t;
        match res {
            Ok(r) => qnr = Some(r),
            Err(e) => notes.push(format!("error: qnr: {e}")),
        }
    }

    row.rb_plain = plain.as_ref().map(|r| r.root_bound);
    row.rb_qnr = qnr.as_ref().map(|r| r.root_bound);
    row.nodes_plain = plain.as_ref().map(|r| r.nodes);
    row.nodes_qnr = qnr.as_ref().map(|r| r.nodes);
    let certified = |r: &Option<SolveReport>| r.as_ref().filter(|r| r.status == SolveStatus::Optimal).and_then(|r| r.incumbent);
    let (cp, cq) = (certified(&plain), certified(&qnr));
    if let (Some(a), Some(b)) = (cp, cq) {
        if (a - b).abs() > 1e-4 * a.abs().max(1.0) {
            notes.push(format!("mismatch: plain {a} vs qnr {b}"));
        }
    }
    (row.opt, row.opt_certified) = match (cp, cq) {
        (Some(v), _) | (None, Some(v)) => (Some(v), true),
        _ => {
            let best = [&plain, &qnr].iter().filter_map(|r| r.as_ref().and_then(|r| r.incumbent)).reduce(f64::min);
            (best, false)
        }
    };
    if let (Some(rp), Some(rq), Some(opt)) = (row.rb_plain, row.rb_qnr, row.opt) {
        row.gc = if opt - rp <= cfg.rel_tol * opt.abs().max(1.0) {
            Gc::RootExact
        } else {
            gap_closed(rp, rq, opt).map_or(Gc::RootExact, Gc::Value)
        };
    }
    let st = |r: &Option<SolveReport>| r.as_ref().map_or("NONE", |r| r.status.as_str());
    row.status = format!("plain:{} qnr:{}", st(&plain), st(&qnr));
    for note in notes {
        row.status.push_str("; ");
        row.status.push_str(&note);
    }
    row
}

/// Runs every seed, at most `cfg.jobs` at a time. Rows come back in seed
/// order; a failing or panicking instance yields an error row.
pub fn run_benchmark(cfg: &BenchConfig) -> Vec<BenchRow> {
    let seeds = &cfg.seeds;
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<BenchRow>>> = Mutex::new(vec![None; seeds.len()]);
    let jobs = cfg.jobs.clamp(1, seeds.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= seeds.len() {
                    break;
                }
                let seed = seeds[k];
                let row = std::panic::catch_unwind(|| run_instance(cfg, seed)).unwrap_or_else(|_| {
                    let mut r = BenchRow::empty(cfg, seed);
                    r.status = "error: panic".into();
                    r
                });
                log::info!("{} {}", row.id, row.status);
                rows.lock().unwrap()[k] = Some(row);
            });
        }
    });
    rows.into_inner().unwrap().into_iter().map(|r| r.expect("every seed produces a row")).collect()
}

/// `%.6g`-style formatting.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if !(-5..6).contains(&exp) {
        let s = format!("{v:.5e}");
        let (mant, e) = s.split_once('e').unwrap();
        format!("{}e{}", trim(mant.to_string()), e)
    } else {
        trim(format!("{:.*}", (5 - exp).max(0) as usize, v))
    }
}

fn opt_cell(row: &BenchRow) -> String {
    match row.opt {
        Some(v) if row.opt_certified => fmt_sig(v),
        Some(v) => format!("≈{}", fmt_sig(v)),
        None => String::new(),
    }
}

fn gc_cell(gc: Gc) -> String {
    match gc {
        Gc::Value(v) => fmt_sig(v),
        Gc::RootExact => "root-exact".into(),
        Gc::Unavailable => String::new(),
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

fn opt_count(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn csv_string(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.id.clone(),
            r.family.as_str().to_string(),
            r.n.to_string(),
            r.m.to_string(),
            opt_num(r.rb_plain),
            opt_num(r.rb_qnr),
            opt_num(r.sdr),
            opt_cell(r),
            gc_cell(r.gc),
            opt_count(r.nodes_plain),
            opt_count(r.nodes_qnr),
            fmt_sig(r.t_reform_ms),
            fmt_sig(r.t_plain_ms),
            fmt_sig(r.t_qnr_ms),
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Mean of the defined gap-closed values.
pub fn mean_gc(rows: &[BenchRow]) -> Option<f64> {
    let v: Vec<f64> = rows.iter().filter_map(|r| if let Gc::Value(g) = r.gc { Some(g) } else { None }).collect();
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

pub fn report_markdown(cfg: &BenchConfig, rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Benchmark: {} (n={}, m={}, density={})\n", cfg.family.as_str(), cfg.n, cfg.m, fmt_sig(cfg.density));
    let _ = writeln!(
        s,
        "relative tolerance {}, time limit {} s, node limit {}{}\n",
        fmt_sig(cfg.rel_tol),
        fmt_sig(cfg.time_limit),
        cfg.node_limit,
        if cfg.deterministic { ", deterministic timing" } else { "" }
    );
    s.push_str("| Instance | RB plain | RB QNR | SDR | OPT | GC | Nodes plain | Nodes QNR | TT reform (ms) | TG plain (ms) | TG QNR (ms) | Status |\n");
    s.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---|\n");
    for r in rows {
        let gc = match r.gc {
            Gc::Value(v) => format!("{:.1}%", 100.0 * v),
            other => gc_cell(other),
        };
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            r.id,
            opt_num(r.rb_plain),
            opt_num(r.rb_qnr),
            opt_num(r.sdr),
            opt_cell(r),
            gc,
            opt_count(r.nodes_plain),
            opt_count(r.nodes_qnr),
            fmt_sig(r.t_reform_ms),
            fmt_sig(r.t_plain_ms),
            fmt_sig(r.t_qnr_ms),
            r.status.replace('|', "/"),
        );
    }
    s.push('\n');
    match mean_gc(rows) {
        Some(g) => {
            let k = rows.iter().filter(|r| matches!(r.gc, Gc::Value(_))).count();
            let _ = writeln!(s, "Mean GC over {k} instance(s): {:.1}%", 100.0 * g);
        }
        None => s.push_str("Mean GC: undefined (no instance with a defined gap)\n"),
    }
    s
}

/// Writes `results.csv` and `report.md` into `dir`.
pub fn write_reports(cfg: &BenchConfig, rows: &[BenchRow], dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), csv_string(rows))?;
    std::fs::write(dir.join("report.md"), report_markdown(cfg, rows))
}
