//! Fixtures shared by the criterion benchmarks in `benches/`.

use std::collections::HashMap;
use std::sync::Arc;

use muxlock::corpus;
use muxlock::layout::make_floorplan;
use muxlock::sim::toggle_profile;
use muxlock::timing::{critical_path_delay, run_sta};
use muxlock::{CellLibrary, Floorplan, Netlist, TimingReport, ToggleProfile};

/// A corpus design with the analysis results selection needs.
pub struct Fixture {
    pub netlist: Netlist,
    pub floorplan: Floorplan,
    pub report: TimingReport,
    pub profile: ToggleProfile,
    pub assets: Vec<String>,
}

pub fn fixture(name: &str, cycles: usize) -> Fixture {
    let netlist = corpus::load(name, Arc::new(CellLibrary::builtin())).expect("corpus design");
    let floorplan = make_floorplan(&netlist, 0.5).expect("floorplan");
    let period = critical_path_delay(&netlist).expect("acyclic");
    let report = run_sta(&netlist, period, &HashMap::new()).expect("sta");
    let profile = toggle_profile(&netlist, cycles, 1).expect("profile");
    let assets = netlist.ffs().map(|f| netlist.cell(f).name.clone()).collect();
    Fixture { netlist, floorplan, report, profile, assets }
}
