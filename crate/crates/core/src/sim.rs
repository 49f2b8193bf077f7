//! Zero-delay cycle simulation, toggle-rate estimation and equivalence
//! checking.
//!
//! Values are bit-parallel: every net holds `words` 64-bit words, one bit
//! per independent stimulus lane.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::key::Key;
use crate::netlist::{CellId, Driver, NetId, Netlist};

pub const KEYCHAIN_LOAD: &str = "__tmx_load";
pub const KEYCHAIN_DIN: &str = "__tmx_din";
pub const KEYCHAIN_FF_PREFIX: &str = "__tmx_kc_ff";

pub struct Simulator<'a> {
    netlist: &'a Netlist,
    order: Vec<CellId>,
    ffs: Vec<CellId>,
    ff_inv: Vec<Vec<bool>>,
    words: usize,
    values: Vec<u64>,
    state: Vec<u64>,
    scratch: Vec<u64>,
}

impl<'a> Simulator<'a> {
    pub fn new(netlist: &'a Netlist, words: usize) -> Result<Self> {
        let order = netlist.topo_order()?;
        let ffs: Vec<CellId> = netlist.ffs().collect();
        let ff_inv = ffs.iter().map(|&f| netlist.gate_type(f).ff_output_inversion()).collect();
        Ok(Simulator {
            netlist,
            order,
            ff_inv,
            words,
            values: vec![0; netlist.num_nets() * words],
            state: vec![0; ffs.len() * words],
            ffs,
            scratch: Vec::new(),
        })
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn ffs(&self) -> &[CellId] {
        &self.ffs
    }

    pub fn value(&self, net: NetId) -> &[u64] {
        &self.values[net.index() * self.words..(net.index() + 1) * self.words]
    }

    pub fn set(&mut self, net: NetId, words: &[u64]) {
        let w = self.words;
        self.values[net.index() * w..(net.index() + 1) * w].copy_from_slice(words);
    }

    pub fn fill(&mut self, net: NetId, word: u64) {
        let w = self.words;
        self.values[net.index() * w..(net.index() + 1) * w].fill(word);
    }

    pub fn state_mut(&mut self, ff: usize) -> &mut [u64] {
        let w = self.words;
        &mut self.state[ff * w..(ff + 1) * w]
    }

    /// Recompute every net from the current inputs and flop state.
    pub fn propagate(&mut self) {
        let w = self.words;
        for (fi, &f) in self.ffs.iter().enumerate() {
            let cell = self.netlist.cell(f);
            for (pin, &o) in cell.outputs.iter().enumerate() {
                let inv = if self.ff_inv[fi][pin] { !0 } else { 0 };
                for k in 0..w {
                    self.values[o.index() * w + k] = self.state[fi * w + k] ^ inv;
                }
            }
        }
        let lib = self.netlist.library();
        for &c in &self.order {
            let cell = self.netlist.cell(c);
            let t = lib.get(cell.ty);
            for k in 0..w {
                self.scratch.clear();
                self.scratch.extend(cell.inputs.iter().map(|i| self.values[i.index() * w + k]));
                for (pin, &o) in cell.outputs.iter().enumerate() {
                    self.values[o.index() * w + k] = t.outputs[pin].eval(&self.scratch, 0);
                }
            }
        }
    }

    /// Clock edge: every flop samples its D input.
    pub fn clock(&mut self) {
        let w = self.words;
        for (fi, &f) in self.ffs.iter().enumerate() {
            let d = self.netlist.cell(f).inputs[0];
            for k in 0..w {
                self.state[fi * w + k] = self.values[d.index() * w + k];
            }
        }
    }
}

/// Single-lane simulation. `stimulus[t]` holds one value per primary input,
/// `initial` one value per flop (in netlist order). Returns every net's
/// value in each cycle, indexed by [`NetId`].
pub fn simulate(n: &Netlist, stimulus: &[Vec<bool>], initial: &[bool]) -> Result<Vec<Vec<bool>>> {
    let mut sim = Simulator::new(n, 1)?;
    if initial.len() != sim.ffs().len() {
        return Err(Error::VectorWidth { expected: sim.ffs().len(), got: initial.len() });
    }
    for (i, &b) in initial.iter().enumerate() {
        sim.state_mut(i)[0] = if b { !0 } else { 0 };
    }
    let mut out = Vec::with_capacity(stimulus.len());
    for vec in stimulus {
        if vec.len() != n.pis().len() {
            return Err(Error::VectorWidth { expected: n.pis().len(), got: vec.len() });
        }
        for (&pi, &b) in n.pis().iter().zip(vec) {
            sim.fill(pi, if b { !0 } else { 0 });
        }
        sim.propagate();
        out.push((0..n.num_nets()).map(|i| sim.value(NetId(i as u32))[0] & 1 == 1).collect());
        sim.clock();
    }
    Ok(out)
}

/// Toggles per clock cycle of every net.
#[derive(Debug, Clone, PartialEq)]
pub struct ToggleProfile {
    pub tpc: Vec<f64>,
    pub cycles: usize,
    pub seed: u64,
}

impl ToggleProfile {
    pub fn tpc(&self, net: NetId) -> f64 {
        self.tpc[net.index()]
    }
}

pub const DEFAULT_CYCLES: usize = 10_000;
pub const DEFAULT_TPC_THRESHOLD: f64 = 0.1;

/// Primary inputs that hold a fixed value during toggle estimation: key
/// selects take `key` (or 0), keychain controls stay low.
fn held_inputs(n: &Netlist, key: Option<&Key>) -> HashMap<NetId, bool> {
    let mut held = HashMap::new();
    for (i, net) in n.key_selects().into_iter().enumerate() {
        if n.net(net).driver == Some(Driver::Input) {
            held.insert(net, key.is_some_and(|k| k.bits().get(i) == Some(&true)));
        }
    }
    for name in [KEYCHAIN_LOAD, KEYCHAIN_DIN] {
        if let Some(net) = n.find_net(name) {
            held.insert(net, false);
        }
    }
    held
}

/// Estimate toggles per cycle under uniform random primary-input stimulus.
///
/// Each cycle samples every net twice: after the clock edge has propagated
/// (inputs unchanged) and after the inputs switch mid-cycle, so a net changes
/// at most twice per cycle. 64 independent lanes run in parallel and the
/// count is averaged over them.
pub fn toggle_profile(n: &Netlist, cycles: usize, seed: u64) -> Result<ToggleProfile> {
    toggle_profile_keyed(n, cycles, seed, None)
}

pub fn toggle_profile_keyed(n: &Netlist, cycles: usize, seed: u64, key: Option<&Key>) -> Result<ToggleProfile> {
    let cycles = cycles.max(1);
    let held = held_inputs(n, key);
    let free: Vec<NetId> = n.pis().iter().copied().filter(|p| !held.contains_key(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sim = Simulator::new(n, 1)?;
    for (&net, &b) in &held {
        sim.fill(net, if b { !0 } else { 0 });
    }
    let nets = n.num_nets();
    let mut counts = vec![0u64; nets];
    let mut prev = vec![0u64; nets];

    let drive = |sim: &mut Simulator, rng: &mut ChaCha8Rng| {
        for &p in &free {
            sim.fill(p, rng.random());
        }
    };
    let sample = |sim: &Simulator, prev: &mut [u64], counts: &mut [u64]| {
        for i in 0..nets {
            let v = sim.value(NetId(i as u32))[0];
            counts[i] += u64::from((v ^ prev[i]).count_ones());
            prev[i] = v;
        }
    };

    drive(&mut sim, &mut rng);
    sim.propagate();
    for i in 0..nets {
        prev[i] = sim.value(NetId(i as u32))[0];
    }
    for _ in 0..cycles {
        sim.clock();
        sim.propagate();
        sample(&sim, &mut prev, &mut counts);
        drive(&mut sim, &mut rng);
        sim.propagate();
        sample(&sim, &mut prev, &mut counts);
    }
    let denom = (cycles * 64) as f64;
    Ok(ToggleProfile { tpc: counts.iter().map(|&c| c as f64 / denom).collect(), cycles, seed })
}

/// Low-controllability nets and the cells driving them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LowControllability {
    pub nets: Vec<NetId>,
    pub cells: Vec<CellId>,
}

/// LCN = nets with TPC at or below `threshold`; LCC = their driver cells.
pub fn classify_lcn(n: &Netlist, profile: &ToggleProfile, threshold: f64) -> LowControllability {
    let nets: Vec<NetId> = (0..profile.tpc.len().min(n.num_nets()))
        .map(|i| NetId(i as u32))
        .filter(|&id| profile.tpc(id) <= threshold)
        .collect();
    let mut cells: Vec<CellId> = nets.iter().filter_map(|&id| n.driver_cell(id)).collect();
    cells.sort();
    cells.dedup();
    LowControllability { nets, cells }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquivMode {
    /// Every input vector in every cycle; requires at most 20 inputs.
    Exhaustive,
    /// Random vectors from a seeded generator.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Primary-input vectors from the first functional cycle up to `cycle`,
    /// as `(name, value)` pairs.
    pub inputs: Vec<Vec<(String, bool)>>,
    pub cycle: usize,
    pub output: String,
    pub expected: bool,
    pub got: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceVerdict {
    pub mode: EquivMode,
    pub vectors_tested: u64,
    pub mismatch: Option<Counterexample>,
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        self.mismatch.is_none()
    }
}

const EXHAUSTIVE_LIMIT: usize = 20;

/// Vector applied to lane `lane` in cycle `t` of an exhaustive run. For a
/// fixed `t` this is a permutation of all `2^bits` vectors, so every cycle
/// sees the full input space while lanes follow distinct sequences.
fn exhaustive_vector(lane: u64, t: u64, bits: usize) -> u64 {
    let mask = if bits == 64 { !0 } else { (1u64 << bits) - 1 };
    (lane.wrapping_mul(2 * t + 1).wrapping_add(t)) & mask
}

/// Compare `orig` against `locked` under `key`.
///
/// If `locked` carries a keychain, the key is first shifted in through it
/// (one bit per cycle with load high, bit 0 first) and all functional flops
/// are then cleared; if its key selects are primary inputs they are held at
/// the key. Every primary output is compared in every subsequent cycle.
/// `budget` is the number of cycles for exhaustive mode and the number of
/// vectors (64 lanes × cycles) for random mode.
pub fn check_equivalence(orig: &Netlist, locked: &Netlist, key: &Key, mode: EquivMode, budget: usize) -> Result<EquivalenceVerdict> {
    let selects = locked.key_selects();
    let load = locked.find_net(KEYCHAIN_LOAD).filter(|&n| locked.pis().contains(&n));
    let din = locked.find_net(KEYCHAIN_DIN).filter(|&n| locked.pis().contains(&n));
    let chain_len = locked.cells().filter(|(_, c)| c.name.starts_with(KEYCHAIN_FF_PREFIX)).count();
    let key_bits = if load.is_some() { chain_len } else { selects.len() };
    if key.len() != key_bits {
        return Err(Error::KeyLength { expected: key_bits, got: key.len() });
    }

    let mut pi_pairs = Vec::new();
    for &p in orig.pis() {
        let name = &orig.net(p).name;
        let q = locked.find_net(name).filter(|q| locked.pis().contains(q)).ok_or_else(|| Error::InterfaceMismatch(name.clone()))?;
        pi_pairs.push((p, q));
    }
    let mut po_pairs = Vec::new();
    for &p in orig.pos() {
        let name = &orig.net(p).name;
        let q = locked.find_net(name).filter(|&q| locked.is_po(q)).ok_or_else(|| Error::InterfaceMismatch(name.clone()))?;
        po_pairs.push((p, q));
    }
    for &p in locked.pis() {
        let known = pi_pairs.iter().any(|&(_, q)| q == p) || selects.contains(&p) || Some(p) == load || Some(p) == din;
        if !known {
            return Err(Error::InterfaceMismatch(locked.net(p).name.clone()));
        }
    }

    let bits = pi_pairs.len();
    let (lanes, cycles) = match mode {
        EquivMode::Exhaustive => {
            if bits > EXHAUSTIVE_LIMIT {
                return Err(Error::InputSpaceTooLarge(bits));
            }
            (1usize << bits, budget.max(1))
        }
        EquivMode::Random { .. } => (64, budget.max(1).div_ceil(64)),
    };
    let words = lanes.div_ceil(64);
    let mut a = Simulator::new(orig, words)?;
    let mut b = Simulator::new(locked, words)?;

    let fill = |b: bool| if b { !0u64 } else { 0 };
    for (i, &s) in selects.iter().enumerate() {
        if locked.net(s).driver == Some(Driver::Input) {
            b.fill(s, fill(key.bits()[i]));
        }
    }
    if let (Some(load), Some(din)) = (load, din) {
        b.fill(load, !0);
        for &bit in key.bits() {
            b.fill(din, fill(bit));
            b.propagate();
            b.clock();
        }
        b.fill(load, 0);
        b.fill(din, 0);
        let functional: Vec<usize> =
            b.ffs().iter().enumerate().filter(|(_, &f)| !locked.is_internal(f)).map(|(i, _)| i).collect();
        for i in functional {
            b.state_mut(i).fill(0);
        }
    }

    let last_mask = if lanes % 64 == 0 { !0u64 } else { (1u64 << (lanes % 64)) - 1 };
    let mut rng = match mode {
        EquivMode::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        EquivMode::Exhaustive => None,
    };
    let mut history: Vec<Vec<u64>> = Vec::new();
    let mut tested = 0u64;
    let mut words_buf = vec![0u64; words];
    for t in 0..cycles {
        for (j, &(p, q)) in pi_pairs.iter().enumerate() {
            match rng.as_mut() {
                Some(r) => words_buf[0] = r.random(),
                None => {
                    words_buf.fill(0);
                    for lane in 0..lanes {
                        if exhaustive_vector(lane as u64, t as u64, bits) >> j & 1 == 1 {
                            words_buf[lane / 64] |= 1 << (lane % 64);
                        }
                    }
                }
            }
            a.set(p, &words_buf);
            b.set(q, &words_buf);
            if rng.is_some() {
                if history.len() <= t {
                    history.push(Vec::new());
                }
                history[t].push(words_buf[0]);
            }
        }
        a.propagate();
        b.propagate();
        tested += lanes as u64;
        for &(p, q) in &po_pairs {
            let (va, vb) = (a.value(p), b.value(q));
            for w in 0..words {
                let mask = if w + 1 == words { last_mask } else { !0 };
                let diff = (va[w] ^ vb[w]) & mask;
                if diff != 0 {
                    let lane = w * 64 + diff.trailing_zeros() as usize;
                    let inputs = (0..=t)
                        .map(|s| {
                            pi_pairs
                                .iter()
                                .enumerate()
                                .map(|(j, &(p, _))| {
                                    let v = match &rng {
                                        Some(_) => history[s][j] >> lane & 1 == 1,
                                        None => exhaustive_vector(lane as u64, s as u64, bits) >> j & 1 == 1,
                                    };
                                    (orig.net(p).name.clone(), v)
                                })
                                .collect()
                        })
                        .collect();
                    let bit = |v: &[u64]| v[lane / 64] >> (lane % 64) & 1 == 1;
                    return Ok(EquivalenceVerdict {
                        mode,
                        vectors_tested: tested,
                        mismatch: Some(Counterexample {
                            inputs,
                            cycle: t,
                            output: orig.net(p).name.clone(),
                            expected: bit(va),
                            got: bit(vb),
                        }),
                    });
                }
            }
        }
        a.clock();
        b.clock();
    }
    Ok(EquivalenceVerdict { mode, vectors_tested: tested, mismatch: None })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::bench::parse_netlist;
    use crate::corpus;
    use crate::library::CellLibrary;

    fn lib() -> Arc<CellLibrary> {
        Arc::new(CellLibrary::builtin())
    }

    #[test]
    fn and_gate() {
        let n = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n", lib()).unwrap();
        let y = n.net_id("y").unwrap();
        let out = simulate(&n, &[vec![true, true], vec![true, false]], &[]).unwrap();
        assert!(out[0][y.index()]);
        assert!(!out[1][y.index()]);
    }

    #[test]
    fn register_holds_then_passes() {
        let n = parse_netlist("INPUT(d)\nOUTPUT(q)\nq = DFF(d)\n", lib()).unwrap();
        let q = n.net_id("q").unwrap();
        let out = simulate(&n, &[vec![true], vec![true], vec![true]], &[false]).unwrap();
        let seq: Vec<bool> = out.iter().map(|v| v[q.index()]).collect();
        assert_eq!(seq, vec![false, true, true]);
    }

    #[test]
    fn c17_all_zero() {
        let n = parse_netlist(corpus::C17, lib()).unwrap();
        let out = simulate(&n, &[vec![false; 5]], &[]).unwrap();
        // every first-level NAND sees a zero and outputs 1, so both
        // output NANDs see (1, 1)
        for po in ["22", "23"] {
            assert!(!out[0][n.net_id(po).unwrap().index()], "PO {po}");
        }
        assert!(out[0][n.net_id("16").unwrap().index()]);
    }

    #[test]
    fn width_mismatch() {
        let n = parse_netlist(corpus::C17, lib()).unwrap();
        assert_eq!(simulate(&n, &[vec![false; 4]], &[]).unwrap_err(), Error::VectorWidth { expected: 5, got: 4 });
    }

    #[test]
    fn tie_cell_never_toggles() {
        let n = parse_netlist("INPUT(a)\nOUTPUT(z)\nOUTPUT(y)\nz = TIE0()\ny = AND2(a, z)\n", lib()).unwrap();
        let p = toggle_profile(&n, 500, 1).unwrap();
        assert_eq!(p.tpc(n.net_id("z").unwrap()), 0.0);
    }

    #[test]
    fn toggle_flop_is_exactly_one() {
        let n = parse_netlist("OUTPUT(q)\nq = DFF(nq)\nnq = NOT(q)\n", lib()).unwrap();
        let p = toggle_profile(&n, 1000, 3).unwrap();
        assert_eq!(p.tpc(n.net_id("q").unwrap()), 1.0);
        assert_eq!(p.tpc(n.net_id("nq").unwrap()), 1.0);
    }

    #[test]
    fn random_input_toggles_half_the_time() {
        let n = parse_netlist("INPUT(a)\nOUTPUT(a)\n", lib()).unwrap();
        let cycles = 2000;
        let p = toggle_profile(&n, cycles, 9).unwrap();
        // Bernoulli(1/2) changes over 64 * cycles trials
        let sigma = (0.25f64 / (64.0 * cycles as f64)).sqrt();
        assert!((p.tpc(n.net_id("a").unwrap()) - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn lcn_threshold_is_inclusive() {
        let n = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n", lib()).unwrap();
        let (a, b, y) = (n.net_id("a").unwrap(), n.net_id("b").unwrap(), n.net_id("y").unwrap());
        let mut tpc = vec![0.0; n.num_nets()];
        tpc[a.index()] = 0.11;
        tpc[b.index()] = 0.5;
        tpc[y.index()] = 0.1;
        let p = ToggleProfile { tpc, cycles: 1, seed: 0 };
        let lcn = classify_lcn(&n, &p, 0.1);
        assert_eq!(lcn.nets, vec![y]);
        assert_eq!(lcn.cells, vec![n.cell_id("y").unwrap()]);
    }

    #[test]
    fn wide_and_root_is_low_controllability() {
        let mut text = String::new();
        for i in 0..8 {
            text += &format!("INPUT(i{i})\n");
        }
        text += "OUTPUT(y)\nl0 = AND(i0, i1, i2, i3)\nl1 = AND(i4, i5, i6, i7)\ny = AND(l0, l1)\n";
        let n = parse_netlist(&text, lib()).unwrap();
        let p = toggle_profile(&n, 4000, 1).unwrap();
        let y = n.net_id("y").unwrap();
        let analytic: f64 = 2.0 * (1.0 / 256.0) * (255.0 / 256.0);
        let sigma = (analytic / (64.0 * 4000.0)).sqrt();
        assert!((p.tpc(y) - analytic).abs() < 4.0 * sigma, "{} vs {analytic}", p.tpc(y));
        assert!(classify_lcn(&n, &p, 0.1).nets.contains(&y));
    }

    #[test]
    fn profile_is_deterministic() {
        let n = corpus::load("s344_like", lib()).unwrap();
        assert_eq!(toggle_profile(&n, 300, 5).unwrap(), toggle_profile(&n, 300, 5).unwrap());
        assert_ne!(toggle_profile(&n, 300, 5).unwrap(), toggle_profile(&n, 300, 6).unwrap());
    }

    #[test]
    fn self_equivalence() {
        let n = parse_netlist(corpus::S27, lib()).unwrap();
        let v = check_equivalence(&n, &n, &Key::default(), EquivMode::Exhaustive, 8).unwrap();
        assert!(v.is_equivalent());
        assert_eq!(v.vectors_tested, 16 * 8);
    }

    #[test]
    fn detects_difference_with_counterexample() {
        let a = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = AND(a, b)\n", lib()).unwrap();
        let b = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = OR(a, b)\n", lib()).unwrap();
        let v = check_equivalence(&a, &b, &Key::default(), EquivMode::Exhaustive, 1).unwrap();
        let cex = v.mismatch.unwrap();
        assert_eq!(cex.output, "y");
        assert!(!cex.expected && cex.got);
        let ins = &cex.inputs[0];
        assert_ne!(ins[0].1, ins[1].1);
        let r = check_equivalence(&a, &b, &Key::default(), EquivMode::Random { seed: 1 }, 256).unwrap();
        assert!(!r.is_equivalent());
    }

    #[test]
    fn exhaustive_limit_and_key_length() {
        let n = corpus::load("c432_like", lib()).unwrap();
        assert_eq!(
            check_equivalence(&n, &n, &Key::default(), EquivMode::Exhaustive, 1).unwrap_err(),
            Error::InputSpaceTooLarge(36)
        );
        assert_eq!(
            check_equivalence(&n, &n, &"1".parse().unwrap(), EquivMode::Random { seed: 1 }, 64).unwrap_err(),
            Error::KeyLength { expected: 0, got: 1 }
        );
    }

    #[test]
    fn exhaustive_vectors_cover_the_space_each_cycle() {
        for t in 0..5u64 {
            let mut seen: Vec<u64> = (0..32).map(|l| exhaustive_vector(l, t, 5)).collect();
            seen.sort();
            assert_eq!(seen, (0..32).collect::<Vec<_>>());
        }
    }
}
