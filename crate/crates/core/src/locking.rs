//! Locking instances, cell selection, key shift register and the two-stage
//! hardening flow.
//!
//! A locking instance wraps one cell: the cell (or its complement) feeds an
//! inverter, and a MUX2 whose select is a key bit picks either the direct or
//! the inverted signal. Which of the two carries the original function is
//! randomized, so the key bit is uniform and the inserted structure is the
//! same in every configuration.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use log::{debug, info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::key::Key;
use crate::layout::{site_usage, Floorplan};
use crate::library::{CellLibrary, TypeId};
use crate::netlist::{CellId, Driver, NetId, Netlist};
use crate::sim::{
    check_equivalence, classify_lcn, toggle_profile, toggle_profile_keyed, EquivMode, EquivalenceVerdict, ToggleProfile,
    DEFAULT_CYCLES, DEFAULT_TPC_THRESHOLD, KEYCHAIN_DIN, KEYCHAIN_LOAD,
};
use crate::timing::{critical_path_delay, pessimistic_update, run_sta, score, TimingReport, DEFAULT_FALLBACK_SLACK};

const MUX_PREFIX: &str = "__tmx_mux";
const KEY_PREFIX: &str = "__tmx_key";

/// Locking scheme: randomized configurations, or always the first one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Tromux,
    Naive,
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "tromux" => Ok(Scheme::Tromux),
            "naive" => Ok(Scheme::Naive),
            _ => Err(format!("unknown scheme `{s}` (expected tromux or naive)")),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Tromux => "tromux",
            Scheme::Naive => "naive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TroMuxRecord {
    pub locked_cell: String,
    pub original_type: String,
    pub implemented_type: String,
    pub mux_cell: String,
    pub inv_cell: Option<String>,
    pub key_index: usize,
    pub key_bit: bool,
    pub configuration: u8,
}

/// Number of locking instances that fit in `open_sites`.
pub fn key_length(open_sites: u64, lib: &CellLibrary, alpha: u32) -> usize {
    (open_sites / (u64::from(lib.instance_width()) + u64::from(alpha))) as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    /// Inverter on the output; the complement type is optional for flops.
    Inv(Option<TypeId>),
    /// Flop whose Q and QN both feed the MUX.
    QPair,
}

impl Form {
    fn configurations(self) -> u8 {
        match self {
            Form::Inv(Some(_)) => 4,
            _ => 2,
        }
    }
}

fn form(n: &Netlist, cell: CellId) -> Result<Form> {
    let c = n.cell(cell);
    let gt = n.gate_type(cell);
    let unsupported = || Error::UnsupportedType(c.name.clone(), gt.name.clone());
    if n.is_internal(cell) {
        return Err(unsupported());
    }
    if gt.is_ff() {
        return Ok(if gt.outputs.len() >= 2 { Form::QPair } else { Form::Inv(gt.complement) });
    }
    match gt.complement {
        Some(comp) if gt.outputs.len() == 1 => Ok(Form::Inv(Some(comp))),
        _ => Err(unsupported()),
    }
}

/// Number of configurations available for `cell`.
pub fn configuration_count(n: &Netlist, cell: CellId) -> Result<u8> {
    form(n, cell).map(Form::configurations)
}

/// Whether a locking MUX already reads one of the cell's outputs.
pub fn is_locked(n: &Netlist, cell: CellId) -> bool {
    n.cell(cell)
        .outputs
        .iter()
        .any(|&o| n.net(o).sinks.iter().any(|s| n.cell(s.cell).name.starts_with(MUX_PREFIX)))
}

fn next_key_index(n: &Netlist) -> usize {
    n.nets()
        .filter_map(|(_, net)| net.name.strip_prefix(KEY_PREFIX)?.parse::<usize>().ok())
        .map(|i| i + 1)
        .max()
        .unwrap_or(0)
}

/// Lock `cell` in the given configuration (1-based).
///
/// Configurations 1 and 2 keep the type, 3 and 4 use the complement; odd
/// ones put the direct signal on MUX input 0 for the original type and the
/// inverted one for the complement. Flops with a Q/QN pair have two
/// configurations, one per input order.
pub fn lock_cell_config(n: &mut Netlist, cell: CellId, config: u8) -> Result<TroMuxRecord> {
    let form = form(n, cell)?;
    let name = n.cell(cell).name.clone();
    if is_locked(n, cell) {
        return Err(Error::AlreadyLocked(name));
    }
    if !(1..=form.configurations()).contains(&config) {
        return Err(Error::UnsupportedType(name, format!("configuration {config}")));
    }
    let lib = n.library_arc().clone();
    let original = n.cell(cell).ty;
    let i = next_key_index(n);
    let out = n.cell(cell).outputs[0];
    let key = n.add_pi(&format!("{KEY_PREFIX}{i}"))?;
    let g = n.add_net(format!("__tmx_g{i}"))?;
    let mux_name = format!("{MUX_PREFIX}{i}");

    let (implemented, inv_cell, in0, in1, key_bit) = match form {
        Form::QPair => {
            let qn = n.cell(cell).outputs[1];
            n.reconnect_output(cell, 0, g)?;
            let (in0, in1) = if config == 1 { (g, qn) } else { (qn, g) };
            (original, None, in0, in1, config == 2)
        }
        Form::Inv(comp) => {
            let implemented = if config >= 3 { comp.expect("complement checked above") } else { original };
            n.set_cell_type(cell, implemented);
            n.reconnect_output(cell, 0, g)?;
            let ng = n.add_net(format!("__tmx_ng{i}"))?;
            let inv_name = format!("__tmx_inv{i}");
            n.add_cell(inv_name.clone(), lib.inv(), vec![g], vec![ng])?;
            let (in0, in1) = if config == 1 || config == 4 { (g, ng) } else { (ng, g) };
            (implemented, Some(inv_name), in0, in1, config == 2 || config == 4)
        }
    };
    n.add_cell(mux_name.clone(), lib.mux(), vec![in0, in1, key], vec![out])?;
    Ok(TroMuxRecord {
        locked_cell: name,
        original_type: lib.get(original).name.clone(),
        implemented_type: lib.get(implemented).name.clone(),
        mux_cell: mux_name,
        inv_cell,
        key_index: i,
        key_bit,
        configuration: config,
    })
}

/// Lock `cell` with a uniformly drawn configuration.
pub fn lock_cell<R: Rng>(n: &mut Netlist, cell: CellId, rng: &mut R) -> Result<TroMuxRecord> {
    lock_cell_with(n, cell, Scheme::Tromux, rng)
}

pub fn lock_cell_with<R: Rng>(n: &mut Netlist, cell: CellId, scheme: Scheme, rng: &mut R) -> Result<TroMuxRecord> {
    let config = match scheme {
        Scheme::Tromux => rng.random_range(1..=configuration_count(n, cell)?),
        Scheme::Naive => 1,
    };
    lock_cell_config(n, cell, config)
}

/// Cells that stand in for a complex cell, and primary outputs reachable
/// from it without passing a lockable cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Deferral {
    pub targets: Vec<CellId>,
    pub unprotected: Vec<NetId>,
}

/// Depth-first walk over the fan-out of `cell`, through cells that cannot be
/// locked in place, collecting the first lockable cell on every path. Cells
/// that are already locked end a path without being collected.
pub fn deferral_targets(n: &Netlist, cell: CellId) -> Deferral {
    let mut d = Deferral::default();
    let mut seen_nets = HashSet::new();
    let mut seen_cells = HashSet::from([cell]);
    let mut stack: Vec<NetId> = n.cell(cell).outputs.iter().rev().copied().collect();
    while let Some(net) = stack.pop() {
        if !seen_nets.insert(net) {
            continue;
        }
        if n.is_po(net) {
            d.unprotected.push(net);
        }
        let mut next = Vec::new();
        for s in &n.net(net).sinks {
            let c = s.cell;
            if n.is_internal(c) || !seen_cells.insert(c) {
                continue;
            }
            if n.gate_type(c).is_lockable() {
                if !is_locked(n, c) {
                    d.targets.push(c);
                }
            } else {
                next.extend(n.cell(c).outputs.iter().copied());
            }
        }
        stack.extend(next.into_iter().rev());
    }
    d
}

/// Lock the deferral targets of a complex cell. Returns the new records and
/// the names of unprotected primary outputs.
pub fn lock_complex_deferred<R: Rng>(
    n: &mut Netlist,
    cell: CellId,
    scheme: Scheme,
    rng: &mut R,
) -> Result<(Vec<TroMuxRecord>, Vec<String>)> {
    let d = deferral_targets(n, cell);
    if d.targets.is_empty() {
        warn!("no lockable cell in the fan-out of {}", n.cell(cell).name);
    }
    let unprotected = d.unprotected.iter().map(|&p| n.net(p).name.clone()).collect();
    let records = d.targets.iter().map(|&t| lock_cell_with(n, t, scheme, rng)).collect::<Result<_>>()?;
    Ok((records, unprotected))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    score: f64,
    rank: u32,
    cell: CellId,
    version: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then_with(|| other.rank.cmp(&self.rank))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Greedy cell selection by score with pessimistic slack updates.
///
/// Yields cells in decreasing score order, ties going to the smaller name.
/// After each pick, `sigma` is subtracted from the stored slack of every net
/// in the fan-in and fan-out cones of the picked cell's outputs, and the
/// scores of the drivers of those nets are refreshed. Scores only decrease,
/// so stale heap entries are skipped lazily.
pub struct Selector<'a> {
    n: &'a Netlist,
    tpc: &'a [f64],
    slack: Vec<Option<f64>>,
    fallback: f64,
    sigma: f64,
    rank: Vec<u32>,
    version: Vec<u32>,
    open: Vec<bool>,
    heap: BinaryHeap<Entry>,
}

impl<'a> Selector<'a> {
    pub fn new(n: &'a Netlist, report: &TimingReport, profile: &'a ToggleProfile, sigma: f64) -> Self {
        let mut by_name: Vec<CellId> = n.cells().map(|(id, _)| id).collect();
        by_name.sort_by(|a, b| n.cell(*a).name.cmp(&n.cell(*b).name));
        let mut rank = vec![0u32; n.num_cells()];
        for (r, c) in by_name.into_iter().enumerate() {
            rank[c.index()] = r as u32;
        }
        let open: Vec<bool> = n.cells().map(|(id, c)| !n.is_internal(id) && !is_locked(n, id) && !c.outputs.is_empty()).collect();
        let mut s = Selector {
            n,
            tpc: &profile.tpc,
            slack: report.worst_slack.clone(),
            fallback: report.fallback_slack,
            sigma,
            rank,
            version: vec![0; n.num_cells()],
            open,
            heap: BinaryHeap::new(),
        };
        let entries: Vec<Entry> = (0..n.num_cells()).filter(|&i| s.open[i]).map(|i| s.entry(CellId(i as u32))).collect();
        s.heap = BinaryHeap::from(entries);
        s
    }

    fn cell_score(&self, cell: CellId) -> f64 {
        self.n
            .cell(cell)
            .outputs
            .iter()
            .map(|o| score(self.slack[o.index()].unwrap_or(self.fallback), self.tpc[o.index()]))
            .sum()
    }

    fn entry(&self, cell: CellId) -> Entry {
        Entry { score: self.cell_score(cell), rank: self.rank[cell.index()], cell, version: self.version[cell.index()] }
    }

    /// Current stored slacks, after all updates so far.
    pub fn slack(&self) -> &[Option<f64>] {
        &self.slack
    }
}

impl Iterator for Selector<'_> {
    type Item = CellId;

    fn next(&mut self) -> Option<CellId> {
        while let Some(e) = self.heap.pop() {
            let i = e.cell.index();
            if !self.open[i] || e.version != self.version[i] {
                continue;
            }
            self.open[i] = false;
            let outputs = self.n.cell(e.cell).outputs.clone();
            let touched = pessimistic_update(self.n, &mut self.slack, &outputs, self.sigma).unwrap_or_default();
            let mut drivers: Vec<CellId> = touched.iter().filter_map(|&t| self.n.driver_cell(t)).collect();
            drivers.sort();
            drivers.dedup();
            for d in drivers {
                if self.open[d.index()] {
                    self.version[d.index()] += 1;
                    let entry = self.entry(d);
                    self.heap.push(entry);
                }
            }
            return Some(e.cell);
        }
        None
    }
}

/// Up to `k` cells chosen by [`Selector`].
pub fn select_cells(n: &Netlist, report: &TimingReport, profile: &ToggleProfile, k: usize, sigma: f64) -> Vec<CellId> {
    Selector::new(n, report, profile, sigma).take(k).collect()
}

/// Replace the key-select inputs with a shift register loaded through two
/// new inputs. Stage `i` drives select `i`; it shifts from stage `i + 1`
/// (the last stage from the data input) while load is high and holds
/// otherwise, so streaming the key bit 0 first over `k` cycles leaves every
/// select at its key bit.
pub fn build_keychain(n: &mut Netlist, key: &Key) -> Result<()> {
    let all = n.key_selects();
    let selects: Vec<NetId> = all.iter().copied().filter(|&s| n.net(s).driver == Some(Driver::Input)).collect();
    if selects.len() != key.len() || selects.len() != all.len() {
        return Err(Error::SelectCountMismatch { expected: key.len(), got: selects.len() });
    }
    if selects.is_empty() {
        return Ok(());
    }
    let lib = n.library_arc().clone();
    let din = n.add_pi(KEYCHAIN_DIN)?;
    let load = n.add_pi(KEYCHAIN_LOAD)?;
    for &s in &selects {
        n.remove_pi(s);
    }
    let k = selects.len();
    for (i, &sel) in selects.iter().enumerate() {
        let d = n.add_net(format!("__tmx_kc_d{i}"))?;
        n.add_cell(format!("__tmx_kc_ff{i}"), lib.ff(), vec![d], vec![sel])?;
        let shift_in = if i + 1 == k { din } else { selects[i + 1] };
        n.add_cell(format!("__tmx_kc_mux{i}"), lib.mux(), vec![sel, shift_in, load], vec![d])?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockingConfig {
    /// Timing budget in sites added to every instance's footprint.
    pub alpha: u32,
    /// Slack penalty per selection; defaults to the INV plus MUX2 delay.
    pub sigma: Option<f64>,
    pub seed: u64,
    /// Defaults to the critical path delay of the unlocked design.
    pub clock_period: Option<f64>,
    pub tpc_threshold: f64,
    pub cycles: usize,
    pub scheme: Scheme,
    pub fallback_slack: f64,
    pub verify: bool,
}

impl Default for LockingConfig {
    fn default() -> Self {
        LockingConfig {
            alpha: 3,
            sigma: None,
            seed: 1,
            clock_period: None,
            tpc_threshold: DEFAULT_TPC_THRESHOLD,
            cycles: DEFAULT_CYCLES,
            scheme: Scheme::Tromux,
            fallback_slack: DEFAULT_FALLBACK_SLACK,
            verify: true,
        }
    }
}

impl LockingConfig {
    pub fn sigma_for(&self, lib: &CellLibrary) -> f64 {
        self.sigma.unwrap_or_else(|| lib.delay(lib.inv()) + lib.delay(lib.mux()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardenReport {
    pub scheme: Scheme,
    pub alpha: u32,
    pub sigma: f64,
    pub clock_period: f64,
    pub total_sites: u64,
    pub open_sites_before: u64,
    pub open_sites_ppl: u64,
    pub open_sites_after: u64,
    pub utilization_before: f64,
    pub utilization_after: f64,
    pub assets: usize,
    pub locked_assets: usize,
    pub lcc: usize,
    pub locked_lcc: usize,
    /// Instances the first application of the key-length bound allowed
    /// after stage 1.
    pub stage2_budget: usize,
    pub key_length: usize,
    /// Selection ran out of candidates while sites remained.
    pub shortfall: bool,
    pub skipped_for_space: usize,
    pub unprotected_outputs: Vec<String>,
    pub wns_before: f64,
    pub wns_after: f64,
    pub tns_after: f64,
    pub verification: Option<EquivalenceVerdict>,
}

#[derive(Debug, Clone)]
pub struct HardenedDesign {
    pub locked: Netlist,
    pub key: Key,
    pub records: Vec<TroMuxRecord>,
    pub report: HardenReport,
}

/// Worst-case sites one more instance on `cell` consumes, including its
/// key-register stage.
fn instance_cost(n: &Netlist, cell: CellId) -> Result<u64> {
    let lib = n.library();
    let w = |t: TypeId| u64::from(lib.width(t));
    let ty = n.cell(cell).ty;
    let base = 2 * w(lib.mux()) + w(lib.ff());
    Ok(match form(n, cell)? {
        Form::QPair => base,
        Form::Inv(comp) => base + w(lib.inv()) + comp.map_or(0, |c| w(c).saturating_sub(w(ty))),
    })
}

fn resolve_assets(n: &Netlist, assets: &[String]) -> Result<Vec<CellId>> {
    let mut ids = Vec::new();
    for a in assets {
        let id = n.find_cell(a).ok_or_else(|| Error::UnknownAsset(a.clone()))?;
        if !n.is_ff(id) {
            return Err(Error::NotAnFf(a.clone()));
        }
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    Ok(ids)
}

/// Equivalence check used after hardening: exhaustive for small input
/// spaces, random otherwise.
pub fn self_check(orig: &Netlist, locked: &Netlist, key: &Key, seed: u64) -> Result<EquivalenceVerdict> {
    let sequential = orig.ffs().next().is_some();
    if orig.pis().len() <= 12 {
        check_equivalence(orig, locked, key, EquivMode::Exhaustive, if sequential { 16 } else { 1 })
    } else {
        check_equivalence(orig, locked, key, EquivMode::Random { seed }, 64 * 512)
    }
}

/// Two-stage hardening: lock every asset flop, then fill the remaining open
/// sites with instances on cells chosen by [`Selector`] using timing and
/// toggle data of the partially locked design, and finally build the key
/// register.
pub fn harden(n: &Netlist, assets: &[String], fp: &Floorplan, cfg: &LockingConfig) -> Result<HardenedDesign> {
    let lib = n.library_arc().clone();
    let asset_ids = resolve_assets(n, assets)?;
    let before = site_usage(n, fp)?;
    let sigma = cfg.sigma_for(&lib);
    let period = match cfg.clock_period {
        Some(p) => p,
        None => critical_path_delay(n)?,
    };
    let wns_before = run_sta(n, period, &HashMap::new())?.wns;
    let lcc: HashSet<String> = {
        let profile = toggle_profile(n, cfg.cycles, cfg.seed)?;
        classify_lcn(n, &profile, cfg.tpc_threshold).cells.into_iter().map(|c| n.cell(c).name.clone()).collect()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut locked = n.clone();
    let mut records = Vec::new();
    for &a in &asset_ids {
        records.push(lock_cell_with(&mut locked, a, cfg.scheme, &mut rng)?);
    }
    let locked_assets = records.len();

    let stage = u64::from(lib.width(lib.ff()) + lib.width(lib.mux()));
    let occupied = locked.total_width() + stage * records.len() as u64;
    let total = fp.total_sites();
    if occupied > total {
        return Err(Error::Overflow { needed: occupied, total });
    }
    let open_ppl = total - occupied;
    let mut remaining = open_ppl;
    let stage2_budget = key_length(remaining, &lib, cfg.alpha);
    info!("stage 1 locked {locked_assets} assets, {open_ppl} open sites, stage 2 budget {stage2_budget}");

    let mut shortfall = false;
    let mut skipped = 0usize;
    let mut unprotected: Vec<String> = Vec::new();
    if stage2_budget > 0 {
        let ppl = locked.clone();
        let ppl_key = Key(records.iter().map(|r| r.key_bit).collect());
        let report = run_sta(&ppl, period, &HashMap::new())?.with_fallback(cfg.fallback_slack);
        let profile = toggle_profile_keyed(&ppl, cfg.cycles, cfg.seed, Some(&ppl_key))?;
        let mut selector = Selector::new(&ppl, &report, &profile, sigma);
        while key_length(remaining, &lib, cfg.alpha) > 0 {
            let Some(c) = selector.next() else {
                shortfall = true;
                break;
            };
            if is_locked(&locked, c) {
                continue;
            }
            let targets = if locked.gate_type(c).is_lockable() {
                vec![c]
            } else {
                let d = deferral_targets(&locked, c);
                for p in d.unprotected {
                    let name = locked.net(p).name.clone();
                    if !unprotected.contains(&name) {
                        unprotected.push(name);
                    }
                }
                d.targets
            };
            for t in targets {
                if instance_cost(&locked, t)? > remaining {
                    skipped += 1;
                    continue;
                }
                let w0 = locked.total_width();
                records.push(lock_cell_with(&mut locked, t, cfg.scheme, &mut rng)?);
                remaining -= locked.total_width() - w0 + stage;
            }
        }
        debug!("stage 2 locked {} cells, {remaining} sites left", records.len() - locked_assets);
    }

    let key = Key(records.iter().map(|r| r.key_bit).collect());
    build_keychain(&mut locked, &key)?;
    let after = site_usage(&locked, fp)?;
    let timing_after = run_sta(&locked, period, &HashMap::new())?;
    let locked_lcc = records.iter().filter(|r| lcc.contains(&r.locked_cell)).count();

    let verification = if cfg.verify {
        let v = self_check(n, &locked, &key, cfg.seed)?;
        if let Some(m) = &v.mismatch {
            return Err(Error::EquivalenceFailed(format!(
                "output {} differs in cycle {} (expected {}, got {})",
                m.output, m.cycle, u8::from(m.expected), u8::from(m.got)
            )));
        }
        Some(v)
    } else {
        None
    };

    let report = HardenReport {
        scheme: cfg.scheme,
        alpha: cfg.alpha,
        sigma,
        clock_period: period,
        total_sites: total,
        open_sites_before: before.open,
        open_sites_ppl: open_ppl,
        open_sites_after: after.open,
        utilization_before: before.utilization,
        utilization_after: after.utilization,
        assets: asset_ids.len(),
        locked_assets,
        lcc: lcc.len(),
        locked_lcc,
        stage2_budget,
        key_length: key.len(),
        shortfall,
        skipped_for_space: skipped,
        unprotected_outputs: unprotected,
        wns_before,
        wns_after: timing_after.wns,
        tns_after: timing_after.tns,
        verification,
    };
    Ok(HardenedDesign { locked, key, records, report })
}
