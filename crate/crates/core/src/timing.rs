//! Static timing analysis and cell scoring.
//!
//! Arrival times are longest paths from primary inputs and flop outputs;
//! required times propagate back from primary outputs and flop D inputs, all
//! constrained to the clock period. The worst slack of a net is then the
//! minimum slack over every timing path through it, without enumerating
//! paths.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::netlist::{CellId, Direction, NetId, Netlist};
use crate::sim::ToggleProfile;

/// Slack assumed for nets that no timing path covers.
pub const DEFAULT_FALLBACK_SLACK: f64 = -0.5;

/// Guard added to the toggle rate in the net score.
pub const TPC_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub clock_period: f64,
    pub arrival: Vec<Option<f64>>,
    /// `None` marks an uncovered net.
    pub worst_slack: Vec<Option<f64>>,
    pub wns: f64,
    pub tns: f64,
    /// Largest arrival at any endpoint.
    pub critical_delay: f64,
    pub fallback_slack: f64,
}

impl TimingReport {
    pub fn is_covered(&self, net: NetId) -> bool {
        self.worst_slack.get(net.index()).is_some_and(Option::is_some)
    }

    /// Worst slack of the net, or the fallback when uncovered.
    pub fn min_slack(&self, net: NetId) -> Result<f64> {
        self.worst_slack
            .get(net.index())
            .map(|s| s.unwrap_or(self.fallback_slack))
            .ok_or_else(|| Error::UnknownNet(format!("#{}", net.0)))
    }

    pub fn with_fallback(mut self, fallback: f64) -> Self {
        self.fallback_slack = fallback;
        self
    }
}

/// Timing endpoints: primary outputs and flop D inputs, one entry per pin.
fn endpoints(n: &Netlist) -> Vec<NetId> {
    let mut e: Vec<NetId> = n.pos().to_vec();
    e.extend(n.ffs().map(|f| n.cell(f).inputs[0]));
    e
}

fn fold_max(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |m| m.max(v)))
}

fn fold_min(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |m| m.min(v)))
}

/// Run STA with one worst-case delay per gate type plus optional extra delay
/// on individual nets.
pub fn run_sta(n: &Netlist, clock_period: f64, extra: &HashMap<NetId, f64>) -> Result<TimingReport> {
    let order = n.topo_order()?;
    let lib = n.library();
    let extra_of = |net: NetId| extra.get(&net).copied().unwrap_or(0.0);

    let mut arrival: Vec<Option<f64>> = vec![None; n.num_nets()];
    for &pi in n.pis() {
        arrival[pi.index()] = Some(extra_of(pi));
    }
    for f in n.ffs() {
        let d = lib.delay(n.cell(f).ty);
        for &o in &n.cell(f).outputs {
            arrival[o.index()] = Some(d + extra_of(o));
        }
    }
    for &c in &order {
        let cell = n.cell(c);
        if let Some(t) = cell.inputs.iter().filter_map(|i| arrival[i.index()]).fold(None, fold_max) {
            let d = lib.delay(cell.ty);
            for &o in &cell.outputs {
                arrival[o.index()] = Some(t + d + extra_of(o));
            }
        }
    }

    let ends = endpoints(n);
    let mut required: Vec<Option<f64>> = vec![None; n.num_nets()];
    for &e in &ends {
        required[e.index()] = Some(clock_period);
    }
    for &c in order.iter().rev() {
        let cell = n.cell(c);
        let d = lib.delay(cell.ty);
        let tightest = cell
            .outputs
            .iter()
            .filter_map(|&o| required[o.index()].map(|r| r - extra_of(o) - d))
            .fold(None, fold_min);
        if let Some(r) = tightest {
            for &i in &cell.inputs {
                required[i.index()] = fold_min(required[i.index()], r);
            }
        }
    }

    let worst_slack: Vec<Option<f64>> = arrival
        .iter()
        .zip(&required)
        .map(|(a, r)| Some((*r)? - (*a)?))
        .collect();
    let wns = worst_slack.iter().flatten().copied().fold(None, fold_min).unwrap_or(clock_period);
    let end_arrivals: Vec<f64> = ends.iter().filter_map(|e| arrival[e.index()]).collect();
    let tns = end_arrivals.iter().map(|a| (clock_period - a).min(0.0)).sum();
    let critical_delay = end_arrivals.iter().copied().fold(0.0, f64::max);
    Ok(TimingReport { clock_period, arrival, worst_slack, wns, tns, critical_delay, fallback_slack: DEFAULT_FALLBACK_SLACK })
}

/// Longest source-to-endpoint delay of the netlist.
pub fn critical_path_delay(n: &Netlist) -> Result<f64> {
    Ok(run_sta(n, 0.0, &HashMap::new())?.critical_delay)
}

/// Score of a net from its slack and toggle rate.
pub fn score(min_slack: f64, tpc: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * min_slack).exp()) / (tpc + TPC_MARGIN)
}

pub fn net_score(net: NetId, report: &TimingReport, profile: &ToggleProfile) -> Result<f64> {
    Ok(score(report.min_slack(net)?, profile.tpc(net)))
}

/// Sum of the scores of every net the cell drives, in output order.
pub fn cell_score(n: &Netlist, cell: CellId, report: &TimingReport, profile: &ToggleProfile) -> Result<f64> {
    n.cell(cell).outputs.iter().map(|&o| net_score(o, report, profile)).sum()
}

/// Nets whose stored slack a pessimistic update on `net` touches: the net,
/// its fan-in cone and its fan-out cone, stopping at flops.
pub fn affected_nets(n: &Netlist, net: NetId) -> Result<HashSet<NetId>> {
    let mut s = n.cone(net, Direction::Fanin, false)?;
    s.extend(n.cone(net, Direction::Fanout, false)?);
    s.insert(net);
    Ok(s)
}

/// Subtract `sigma` from the stored slack of every net affected by locking a
/// cell that drives `driven`. Uncovered nets stay uncovered. Returns the
/// touched nets.
pub fn pessimistic_update(n: &Netlist, slack: &mut [Option<f64>], driven: &[NetId], sigma: f64) -> Result<HashSet<NetId>> {
    let mut touched = HashSet::new();
    for &d in driven {
        touched.extend(affected_nets(n, d)?);
    }
    for &t in &touched {
        if let Some(s) = slack[t.index()].as_mut() {
            *s -= sigma;
        }
    }
    Ok(touched)
}
