//! Command implementations behind the `muxlock` binary.
//!
//! Every command returns a [`RunReport`] that serializes to JSON with a
//! fixed set of fields; sections that do not apply to a command are `null`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, ValueEnum};
use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

use muxlock::eval::{self, AttackResult, ExportOptions, Prediction};
use muxlock::layout::{make_floorplan, site_usage};
use muxlock::locking::HardenReport;
use muxlock::sim::{self, check_equivalence, classify_lcn, toggle_profile, EquivMode, EquivalenceVerdict};
use muxlock::timing::{critical_path_delay, run_sta};
use muxlock::{
    harden, parse_netlist, write_netlist, CellLibrary, Floorplan, Key, LockingConfig, Netlist, Scheme, SiteUsage,
    TroMuxRecord,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exhaustive verification is used up to this many primary inputs.
pub const EXHAUSTIVE_PIS: usize = 16;

#[derive(Debug)]
pub enum Failure {
    Io { path: PathBuf, source: std::io::Error },
    Core(muxlock::Error),
    Usage(String),
    NotEquivalent(String),
}

impl Failure {
    /// 2 for unreadable or malformed input, 3 for semantic errors, 4 for
    /// internal invariant failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io { .. } | Failure::Usage(_) => 2,
            Failure::Core(e) if e.is_input_error() => 2,
            Failure::Core(e) if e.is_internal() => 4,
            Failure::Core(_) | Failure::NotEquivalent(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(m) => f.write_str(m),
            Failure::NotEquivalent(m) => write!(f, "designs differ: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<muxlock::Error> for Failure {
    fn from(e: muxlock::Error) -> Self {
        Failure::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub primary_inputs: usize,
    pub primary_outputs: usize,
    pub cells: usize,
    pub ffs: usize,
    pub nets: usize,
    pub total_width: u64,
    pub floorplan: Floorplan,
    pub site_usage: SiteUsage,
    pub clock_period: f64,
    pub critical_delay: f64,
    pub wns: f64,
    pub tns: f64,
    pub covered_nets: usize,
    pub uncovered_nets: usize,
    /// How toggle rates were estimated.
    pub tpc_stimulus: &'static str,
    pub cycles: usize,
    pub tpc_threshold: f64,
    pub lcn: usize,
    pub lcc: usize,
    pub min_tpc: Option<f64>,
    pub mean_tpc: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LockReport {
    pub floorplan: Floorplan,
    pub key_length: usize,
    /// Locked assets over designated assets, as `locked/total`.
    pub lsa: String,
    /// Locked low-controllability cells over all of them.
    pub llcc: String,
    pub harden: HardenReport,
    pub records: Vec<TroMuxRecord>,
    pub bench: String,
    pub key: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub key_length: usize,
    pub equivalent: bool,
    pub verdict: EquivalenceVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSummary {
    pub probed: usize,
    pub nonzero: usize,
    pub max_signal: usize,
    /// Percent of probed bits with a nonzero signal.
    pub cope: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackReport {
    pub threshold: f64,
    pub key_length: usize,
    /// One character per key bit: `0`, `1` or `X`.
    pub predictions: String,
    pub total: usize,
    pub correct: usize,
    pub x_count: usize,
    pub ac: f64,
    pub pc: f64,
    pub kpa: Option<f64>,
    /// `kpa` with two decimals, or `--` when every bit is X.
    pub kpa_text: String,
    pub probe: Option<ProbeSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExportReport {
    pub output: String,
    pub ffs_as_pseudo_io: bool,
    pub gates: usize,
}

/// Machine-readable outcome of one command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub timings: Vec<StageTiming>,
    pub analysis: Option<AnalyzeReport>,
    pub lock: Option<LockReport>,
    pub verification: Option<VerifyReport>,
    pub attack: Option<AttackReport>,
    pub export: Option<ExportReport>,
}

impl RunReport {
    fn new(command: &'static str, seed: Option<u64>) -> Self {
        RunReport {
            tool_version: TOOL_VERSION,
            command,
            seed,
            inputs: Vec::new(),
            timings: Vec::new(),
            analysis: None,
            lock: None,
            verification: None,
            attack: None,
            export: None,
        }
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings.push(StageTiming { stage: stage.to_string(), ms: t.elapsed().as_secs_f64() * 1e3 });
        out
    }

    fn read(&mut self, role: &str, path: &Path) -> CliResult<String> {
        let bytes = fs::read(path).map_err(|source| Failure::Io { path: path.to_path_buf(), source })?;
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
    }

    fn library(&mut self, path: Option<&Path>) -> CliResult<Arc<CellLibrary>> {
        match path {
            Some(p) => {
                let text = self.read("library", p)?;
                Ok(Arc::new(CellLibrary::parse(&text)?))
            }
            None => Ok(Arc::new(CellLibrary::builtin())),
        }
    }

    fn netlist(&mut self, role: &str, path: &Path, lib: &Arc<CellLibrary>) -> CliResult<Netlist> {
        let text = self.read(role, path)?;
        Ok(parse_netlist(&text, lib.clone())?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| Failure::Io { path: path.to_path_buf(), source })
}

#[derive(Debug, Clone, Args)]
pub struct FloorplanArgs {
    /// Placement rows; requires --sites-per-row.
    #[arg(long, requires = "sites_per_row", conflicts_with = "target_util")]
    pub rows: Option<u32>,
    #[arg(long, requires = "rows")]
    pub sites_per_row: Option<u32>,
    /// Size the floorplan so the unlocked design reaches this utilization.
    #[arg(long, default_value_t = 0.5)]
    pub target_util: f64,
}

impl FloorplanArgs {
    pub fn resolve(&self, n: &Netlist) -> CliResult<Floorplan> {
        match (self.rows, self.sites_per_row) {
            (Some(r), Some(s)) => Ok(Floorplan::new(r, s)),
            (None, None) => Ok(make_floorplan(n, self.target_util)?),
            _ => Err(Failure::Usage("--rows and --sites-per-row go together".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Tromux,
    Naive,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Tromux => Scheme::Tromux,
            SchemeArg::Naive => Scheme::Naive,
        }
    }
}

/// Timing, toggle and site statistics of an unlocked design.
#[derive(Debug, Clone, Parser)]
#[command(name = "analyze")]
pub struct AnalyzeArgs {
    pub netlist: PathBuf,
    #[arg(long)]
    pub lib: Option<PathBuf>,
    #[command(flatten)]
    pub floorplan: FloorplanArgs,
    /// Defaults to the critical path delay.
    #[arg(long)]
    pub clock_period: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = sim::DEFAULT_CYCLES)]
    pub cycles: usize,
    #[arg(long, default_value_t = sim::DEFAULT_TPC_THRESHOLD)]
    pub tpc_threshold: f64,
    /// Report path; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> CliResult<RunReport> {
    let mut r = RunReport::new("analyze", Some(a.seed));
    let lib = r.library(a.lib.as_deref())?;
    let n = r.netlist("netlist", &a.netlist, &lib)?;
    let fp = a.floorplan.resolve(&n)?;
    let usage = site_usage(&n, &fp)?;
    let period = match a.clock_period {
        Some(p) => p,
        None => critical_path_delay(&n)?,
    };
    let sta = r.time("sta", || run_sta(&n, period, &Default::default()))?;
    let profile = r.time("toggle", || toggle_profile(&n, a.cycles, a.seed))?;
    let low = classify_lcn(&n, &profile, a.tpc_threshold);
    let covered = (0..n.num_nets()).filter(|&i| sta.is_covered(muxlock::NetId(i as u32))).count();
    let tpc = &profile.tpc;
    r.analysis = Some(AnalyzeReport {
        primary_inputs: n.pis().len(),
        primary_outputs: n.pos().len(),
        cells: n.num_cells(),
        ffs: n.ffs().count(),
        nets: n.num_nets(),
        total_width: n.total_width(),
        floorplan: fp,
        site_usage: usage,
        clock_period: period,
        critical_delay: sta.critical_delay,
        wns: sta.wns,
        tns: sta.tns,
        covered_nets: covered,
        uncovered_nets: n.num_nets() - covered,
        tpc_stimulus: "uniform-random",
        cycles: profile.cycles,
        tpc_threshold: a.tpc_threshold,
        lcn: low.nets.len(),
        lcc: low.cells.len(),
        min_tpc: tpc.iter().copied().reduce(f64::min),
        mean_tpc: (!tpc.is_empty()).then(|| tpc.iter().sum::<f64>() / tpc.len() as f64),
    });
    Ok(r)
}

/// Lock a design and write `<prefix>.bench`, `<prefix>.key` and
/// `<prefix>.report.json`.
#[derive(Debug, Clone, Parser)]
#[command(name = "lock")]
pub struct LockArgs {
    pub netlist: PathBuf,
    #[arg(long)]
    pub lib: Option<PathBuf>,
    /// File listing security-critical flop names, one per line.
    #[arg(long)]
    pub assets: Option<PathBuf>,
    #[command(flatten)]
    pub floorplan: FloorplanArgs,
    #[arg(long, default_value_t = 3)]
    pub alpha: u32,
    /// Defaults to the INV plus MUX2 delay of the library.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = sim::DEFAULT_CYCLES)]
    pub cycles: usize,
    #[arg(long, default_value_t = sim::DEFAULT_TPC_THRESHOLD)]
    pub tpc_threshold: f64,
    #[arg(long)]
    pub clock_period: Option<f64>,
    #[arg(long)]
    pub no_verify: bool,
    #[arg(long, value_enum, default_value_t = SchemeArg::Tromux)]
    pub scheme: SchemeArg,
    /// Output prefix.
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn read_assets(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect()
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub struct LockOutputs {
    pub bench: PathBuf,
    pub key: PathBuf,
    pub report: PathBuf,
}

pub fn lock_outputs(prefix: &Path) -> LockOutputs {
    LockOutputs {
        bench: with_suffix(prefix, ".bench"),
        key: with_suffix(prefix, ".key"),
        report: with_suffix(prefix, ".report.json"),
    }
}

pub fn cmd_lock(a: &LockArgs) -> CliResult<RunReport> {
    let mut r = RunReport::new("lock", Some(a.seed));
    let lib = r.library(a.lib.as_deref())?;
    let n = r.netlist("netlist", &a.netlist, &lib)?;
    let assets = match &a.assets {
        Some(p) => read_assets(&r.read("assets", p)?),
        None => Vec::new(),
    };
    let fp = a.floorplan.resolve(&n)?;
    let cfg = LockingConfig {
        alpha: a.alpha,
        sigma: a.sigma,
        seed: a.seed,
        clock_period: a.clock_period,
        tpc_threshold: a.tpc_threshold,
        cycles: a.cycles,
        scheme: a.scheme.into(),
        verify: !a.no_verify,
        ..LockingConfig::default()
    };
    let hd = r.time("harden", || harden(&n, &assets, &fp, &cfg))?;
    info!("locked {} cells, key length {}", hd.records.len(), hd.key.len());
    let out = lock_outputs(&a.output);
    let rep = &hd.report;
    r.lock = Some(LockReport {
        floorplan: fp,
        key_length: hd.key.len(),
        lsa: format!("{}/{}", rep.locked_assets, rep.assets),
        llcc: format!("{}/{}", rep.locked_lcc, rep.lcc),
        harden: hd.report.clone(),
        records: hd.records.clone(),
        bench: out.bench.display().to_string(),
        key: out.key.display().to_string(),
    });
    write_file(&out.bench, &write_netlist(&hd.locked))?;
    write_file(&out.key, &hd.key.to_file())?;
    write_file(&out.report, &r.to_json())?;
    Ok(r)
}

/// Check a locked design against the original under a key.
#[derive(Debug, Clone, Parser)]
#[command(name = "verify")]
pub struct VerifyArgs {
    pub original: PathBuf,
    pub locked: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub lib: Option<PathBuf>,
    /// Random vectors when the design has too many inputs for exhaustive
    /// checking.
    #[arg(long, default_value_t = 10_000)]
    pub vectors: usize,
    /// Cycles per exhaustive pass on sequential designs.
    #[arg(long, default_value_t = 16)]
    pub exhaustive_cycles: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Exhaustive when the original has at most [`EXHAUSTIVE_PIS`] inputs,
/// random otherwise.
pub fn verify_designs(orig: &Netlist, locked: &Netlist, key: &Key, vectors: usize, cycles: usize, seed: u64) -> CliResult<EquivalenceVerdict> {
    let sequential = orig.ffs().next().is_some();
    Ok(if orig.pis().len() <= EXHAUSTIVE_PIS {
        check_equivalence(orig, locked, key, EquivMode::Exhaustive, if sequential { cycles } else { 1 })?
    } else {
        check_equivalence(orig, locked, key, EquivMode::Random { seed }, vectors)?
    })
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<RunReport> {
    let mut r = RunReport::new("verify", Some(a.seed));
    let lib = r.library(a.lib.as_deref())?;
    let orig = r.netlist("original", &a.original, &lib)?;
    let locked = r.netlist("locked", &a.locked, &lib)?;
    let key = Key::from_file(&r.read("key", &a.key)?)?;
    let v = r.time("verify", || verify_designs(&orig, &locked, &key, a.vectors, a.exhaustive_cycles, a.seed))?;
    r.verification = Some(VerifyReport { key_length: key.len(), equivalent: v.is_equivalent(), verdict: v });
    Ok(r)
}

/// Oracle-less key recovery on a locked design, scored against the key.
#[derive(Debug, Clone, Parser)]
#[command(name = "attack")]
pub struct AttackArgs {
    pub locked: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[arg(long)]
    pub lib: Option<PathBuf>,
    /// Log-likelihood gap below which a bit is left undecided.
    #[arg(long, default_value_t = eval::DEFAULT_X_THRESHOLD)]
    pub threshold: f64,
    /// Skip the constant-propagation probe.
    #[arg(long)]
    pub no_probe: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn kpa_text(res: &AttackResult) -> String {
    res.kpa.map_or_else(|| "--".to_string(), |k| format!("{k:.2}"))
}

pub fn cmd_attack(a: &AttackArgs) -> CliResult<RunReport> {
    let mut r = RunReport::new("attack", None);
    let lib = r.library(a.lib.as_deref())?;
    let locked = r.netlist("locked", &a.locked, &lib)?;
    let key = Key::from_file(&r.read("key", &a.key)?)?;
    let bits = r.time("attack", || eval::local_structure_attack(&locked, a.threshold))?;
    let mut preds = vec![Prediction::X; bits.iter().map(|b| b.key_index + 1).max().unwrap_or(0).max(key.len())];
    for b in &bits {
        preds[b.key_index] = b.prediction;
    }
    let res = eval::score_attack(&preds, &key)?;
    let probe = if a.no_probe {
        None
    } else {
        let signals = r.time("probe", || {
            (0..key.len()).map(|i| eval::constant_prop_probe(&locked, i).map(|p| p.signal())).collect::<muxlock::Result<Vec<_>>>()
        })?;
        let nonzero = signals.iter().filter(|&&s| s > 0).count();
        Some(ProbeSummary {
            probed: signals.len(),
            nonzero,
            max_signal: signals.iter().copied().max().unwrap_or(0),
            cope: if signals.is_empty() { 0.0 } else { 100.0 * nonzero as f64 / signals.len() as f64 },
        })
    };
    r.attack = Some(AttackReport {
        threshold: a.threshold,
        key_length: key.len(),
        predictions: preds.iter().map(|p| p.to_string()).collect(),
        total: res.total,
        correct: res.correct,
        x_count: res.x_count,
        ac: res.ac,
        pc: res.pc,
        kpa: res.kpa,
        kpa_text: kpa_text(&res),
        probe,
    });
    Ok(r)
}

/// Rewrite a netlist with BENCH primitives only.
#[derive(Debug, Clone, Parser)]
#[command(name = "export")]
pub struct ExportArgs {
    pub netlist: PathBuf,
    #[arg(long)]
    pub lib: Option<PathBuf>,
    /// Replace every flop by a pseudo primary input and output.
    #[arg(long)]
    pub ffs_as_pseudo_io: bool,
    /// Destination of the exported netlist.
    #[arg(short, long)]
    pub output: PathBuf,
}

pub fn cmd_export(a: &ExportArgs) -> CliResult<RunReport> {
    let mut r = RunReport::new("export", None);
    let lib = r.library(a.lib.as_deref())?;
    let n = r.netlist("netlist", &a.netlist, &lib)?;
    let opts = ExportOptions { ffs_as_pseudo_io: a.ffs_as_pseudo_io };
    let text = r.time("export", || eval::export_bench(&n, &opts))?;
    write_file(&a.output, &text)?;
    r.export = Some(ExportReport {
        output: a.output.display().to_string(),
        ffs_as_pseudo_io: a.ffs_as_pseudo_io,
        gates: text.lines().filter(|l| l.contains('=')).count(),
    });
    Ok(r)
}

/// Write a report to `path`, or to stdout when absent.
pub fn emit(report: &RunReport, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, &report.to_json()),
        None => {
            print!("{}", report.to_json());
            Ok(())
        }
    }
}
