//! Oracle-less evaluation: BENCH export, a local-structure key-prediction
//! attack, a constant-propagation probe and attack scoring.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::key::Key;
use crate::library::{CellKind, Expr, TypeId};
use crate::netlist::{CellId, Driver, NetId, Netlist};
use crate::sim::{KEYCHAIN_DIN, KEYCHAIN_LOAD};

const KEYCHAIN_CELL_PREFIX: &str = "__tmx_kc_";

/// Gap in log-likelihood below which the attack abstains.
pub const DEFAULT_X_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Cut flops: each Q becomes a pseudo input and each D a pseudo output.
    pub ffs_as_pseudo_io: bool,
}

struct Emitter<'a> {
    out: String,
    taken: HashSet<String>,
    counter: usize,
    rename: &'a dyn Fn(NetId) -> String,
}

impl Emitter<'_> {
    fn fresh(&mut self) -> String {
        loop {
            self.counter += 1;
            let name = format!("x{}", self.counter);
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    fn gate(&mut self, target: Option<String>, op: &str, args: &[String]) -> String {
        let name = target.unwrap_or_else(|| self.fresh());
        let _ = writeln!(self.out, "{name} = {op}({})", args.join(", "));
        name
    }

    fn emit(&mut self, e: &Expr, c: &CellCtx, target: Option<String>, dff: &mut Option<String>) -> Result<String> {
        let list = |me: &mut Self, v: &[Expr], dff: &mut Option<String>| -> Result<Vec<String>> {
            v.iter().map(|x| me.emit(x, c, None, dff)).collect()
        };
        Ok(match e {
            Expr::Var(i) => {
                let name = (self.rename)(c.inputs[*i]);
                match target {
                    Some(t) => self.gate(Some(t), "BUFF", &[name]),
                    None => name,
                }
            }
            Expr::Const(_) => return Err(Error::NoDecomposition(c.name.clone(), c.ty.clone())),
            Expr::Buf(x) => match target {
                Some(t) => {
                    let a = self.emit(x, c, None, dff)?;
                    self.gate(Some(t), "BUFF", &[a])
                }
                None => self.emit(x, c, None, dff)?,
            },
            Expr::Not(x) => {
                let a = self.emit(x, c, None, dff)?;
                self.gate(target, "NOT", &[a])
            }
            Expr::And(v) => {
                let a = list(self, v, dff)?;
                self.gate(target, "AND", &a)
            }
            Expr::Or(v) => {
                let a = list(self, v, dff)?;
                self.gate(target, "OR", &a)
            }
            Expr::Nand(v) => {
                let a = list(self, v, dff)?;
                self.gate(target, "NAND", &a)
            }
            Expr::Nor(v) => {
                let a = list(self, v, dff)?;
                self.gate(target, "NOR", &a)
            }
            Expr::Xor(v) | Expr::Xnor(v) => {
                let a = list(self, v, dff)?;
                let mut acc = a[0].clone();
                for (k, b) in a.iter().enumerate().skip(1) {
                    let last = k + 1 == a.len();
                    let op = if last && matches!(e, Expr::Xnor(_)) { "XNOR" } else { "XOR" };
                    acc = self.gate(if last { target.clone() } else { None }, op, &[acc, b.clone()]);
                }
                if a.len() == 1 {
                    acc = self.gate(target, if matches!(e, Expr::Xnor(_)) { "NOT" } else { "BUFF" }, &[acc]);
                }
                acc
            }
            Expr::Mux(a, b, s) => {
                let a = self.emit(a, c, None, dff)?;
                let b = self.emit(b, c, None, dff)?;
                let s = self.emit(s, c, None, dff)?;
                let ns = self.gate(None, "NOT", std::slice::from_ref(&s));
                let t0 = self.gate(None, "AND", &[a, ns]);
                let t1 = self.gate(None, "AND", &[b, s]);
                self.gate(target, "OR", &[t0, t1])
            }
            Expr::Dff(x) => match dff.clone() {
                Some(q) => match target {
                    Some(t) => self.gate(Some(t), "BUFF", &[q]),
                    None => q,
                },
                None => {
                    let d = self.emit(x, c, None, dff)?;
                    let q = self.gate(target, "DFF", &[d]);
                    *dff = Some(q.clone());
                    q
                }
            },
        })
    }
}

struct CellCtx {
    name: String,
    ty: String,
    inputs: Vec<NetId>,
}

/// BENCH text using only AND/OR/NAND/NOR/NOT/BUFF/XOR/XNOR/DFF.
///
/// Key selects become `keyinput<i>` inputs and the key register is dropped,
/// so the result is the locked design with its key exposed as inputs.
pub fn export_bench(n: &Netlist, opts: &ExportOptions) -> Result<String> {
    let selects = n.key_selects();
    let mut key_name: HashMap<NetId, String> = HashMap::new();
    for (i, &s) in selects.iter().enumerate() {
        key_name.insert(s, format!("keyinput{i}"));
    }
    let rename = |id: NetId| key_name.get(&id).cloned().unwrap_or_else(|| n.net(id).name.clone());
    let skip_cell = |id: CellId| n.cell(id).name.starts_with(KEYCHAIN_CELL_PREFIX) || (opts.ffs_as_pseudo_io && n.is_ff(id));

    let mut inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    for &p in n.pis() {
        let name = &n.net(p).name;
        if name != KEYCHAIN_DIN && name != KEYCHAIN_LOAD {
            inputs.push(rename(p));
        }
    }
    for &s in &selects {
        if n.net(s).driver != Some(Driver::Input) {
            inputs.push(rename(s));
        }
    }
    outputs.extend(n.pos().iter().map(|&p| rename(p)));
    if opts.ffs_as_pseudo_io {
        for f in n.ffs().filter(|&f| !n.cell(f).name.starts_with(KEYCHAIN_CELL_PREFIX)) {
            inputs.extend(n.cell(f).outputs.iter().map(|&o| rename(o)));
            let d = rename(n.cell(f).inputs[0]);
            if !outputs.contains(&d) {
                outputs.push(d);
            }
        }
    }

    let mut taken: HashSet<String> = n.nets().map(|(_, net)| net.name.clone()).collect();
    taken.extend(key_name.values().cloned());
    let mut em = Emitter { out: String::new(), taken, counter: 0, rename: &rename };
    for p in &inputs {
        let _ = writeln!(em.out, "INPUT({p})");
    }
    for p in &outputs {
        let _ = writeln!(em.out, "OUTPUT({p})");
    }
    let lib = n.library();
    for (id, c) in n.cells() {
        if skip_cell(id) {
            continue;
        }
        let gt = lib.get(c.ty);
        let ctx = CellCtx { name: c.name.clone(), ty: gt.name.clone(), inputs: c.inputs.clone() };
        let mut dff = None;
        for (k, e) in gt.outputs.iter().enumerate() {
            em.emit(e, &ctx, Some(rename(c.outputs[k])), &mut dff)?;
        }
    }
    Ok(em.out)
}

/// One predicted key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Prediction {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "X")]
    X,
}

impl fmt::Display for Prediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prediction::Zero => "0",
            Prediction::One => "1",
            Prediction::X => "X",
        })
    }
}

/// Key MUXes by key index: the MUX cell whose select pin reads each key
/// select.
pub fn key_muxes(n: &Netlist) -> Result<Vec<(usize, CellId)>> {
    let lib = n.library();
    let found: Vec<(usize, CellId)> = n
        .key_selects()
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| {
            n.net(s)
                .sinks
                .iter()
                .find(|p| p.pin == 2 && lib.get(n.cell(p.cell).ty).kind == CellKind::Mux)
                .map(|p| (i, p.cell))
        })
        .collect();
    if found.is_empty() {
        return Err(Error::NoKeyMuxes);
    }
    Ok(found)
}

type Edge = (TypeId, u32, TypeId, u32);

/// Driver-to-sink edge frequencies over the unlocked part of a design.
#[derive(Debug, Clone, Default)]
pub struct EdgeModel {
    counts: HashMap<Edge, u64>,
    total: u64,
}

impl EdgeModel {
    /// Count every cell-to-cell edge whose ends are both original cells.
    pub fn train(n: &Netlist) -> Self {
        let mut m = EdgeModel::default();
        for (_, net) in n.nets() {
            let Some(Driver::Cell { cell, pin }) = net.driver else { continue };
            if n.is_internal(cell) {
                continue;
            }
            for s in &net.sinks {
                if !n.is_internal(s.cell) {
                    *m.counts.entry((n.cell(cell).ty, pin, n.cell(s.cell).ty, s.pin)).or_default() += 1;
                    m.total += 1;
                }
            }
        }
        m
    }

    pub fn count(&self, e: &Edge) -> u64 {
        self.counts.get(e).copied().unwrap_or(0)
    }

    /// Add-one smoothed log probability of an edge.
    pub fn log_prob(&self, e: &Edge) -> f64 {
        let v = self.counts.len() as f64 + 1.0;
        ((self.count(e) as f64 + 1.0) / (self.total as f64 + v)).ln()
    }
}

/// Edges that exist only if MUX input `k` is connected straight to the MUX
/// output's sinks. A driver that feeds nothing but key MUXes would otherwise
/// be dead, so its own input edges belong to the hypothesis too.
fn hypothesis_edges(n: &Netlist, mux: CellId, k: usize, key_mux: &HashSet<CellId>) -> Vec<Edge> {
    let x = n.cell(mux).inputs[k];
    let out = n.cell(mux).outputs[0];
    let Some(Driver::Cell { cell: d, pin: p }) = n.net(x).driver else { return Vec::new() };
    let dty = n.cell(d).ty;
    let mut edges: Vec<Edge> = n.net(out).sinks.iter().map(|s| (dty, p, n.cell(s.cell).ty, s.pin)).collect();
    if n.net(x).sinks.iter().all(|s| key_mux.contains(&s.cell)) {
        for (j, &i) in n.cell(d).inputs.iter().enumerate() {
            if let Some(Driver::Cell { cell: e, pin: q }) = n.net(i).driver {
                edges.push((n.cell(e).ty, q, dty, j as u32));
            }
        }
    }
    edges
}

/// Per-bit log-likelihood gap (hypothesis 0 minus hypothesis 1) and the
/// resulting prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitScore {
    pub key_index: usize,
    pub gap: f64,
    pub prediction: Prediction,
}

/// Predict every key bit from local structure alone. For each key MUX the
/// two ways of bypassing it are scored by the likelihood of the edges they
/// create under an [`EdgeModel`] trained on the rest of the design. Bits
/// whose gap is within `threshold` are left undecided.
pub fn local_structure_attack(locked: &Netlist, threshold: f64) -> Result<Vec<BitScore>> {
    let muxes = key_muxes(locked)?;
    let model = EdgeModel::train(locked);
    let set: HashSet<CellId> = muxes.iter().map(|&(_, m)| m).collect();
    let ll = |m: CellId, k: usize| -> f64 { hypothesis_edges(locked, m, k, &set).iter().map(|e| model.log_prob(e)).sum() };
    Ok(muxes
        .into_iter()
        .map(|(i, m)| {
            let gap = ll(m, 0) - ll(m, 1);
            let prediction = if gap > threshold {
                Prediction::Zero
            } else if gap < -threshold {
                Prediction::One
            } else {
                Prediction::X
            };
            BitScore { key_index: i, gap, prediction }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackResult {
    pub predictions: Vec<Prediction>,
    pub total: usize,
    pub correct: usize,
    pub x_count: usize,
    /// Percent of all bits predicted correctly.
    pub ac: f64,
    /// Percent of all bits predicted correctly or left undecided.
    pub pc: f64,
    /// Percent of decided bits predicted correctly; `None` when all are X.
    pub kpa: Option<f64>,
}

pub fn score_attack(predictions: &[Prediction], key: &Key) -> Result<AttackResult> {
    if predictions.len() != key.len() {
        return Err(Error::LengthMismatch { expected: key.len(), got: predictions.len() });
    }
    let total = key.len();
    let x_count = predictions.iter().filter(|&&p| p == Prediction::X).count();
    let correct = predictions
        .iter()
        .zip(key.bits())
        .filter(|(p, &b)| matches!((p, b), (Prediction::Zero, false) | (Prediction::One, true)))
        .count();
    let pct = |num: usize, den: usize| if den == 0 { 0.0 } else { 100.0 * num as f64 / den as f64 };
    Ok(AttackResult {
        predictions: predictions.to_vec(),
        total,
        correct,
        x_count,
        ac: pct(correct, total),
        pc: pct(correct + x_count, total),
        kpa: (x_count < total).then(|| pct(correct, total - x_count)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Const(bool),
    /// Same value as this net.
    Root(NetId),
}

/// Constant propagation over the combinational frame with `forced` nets
/// tied, followed by dead-gate removal. Returns the number of cells that
/// vanish: cells a constant input reduces to a constant or a wire, logic no
/// output depends on, and inverters foldable into their driver.
fn eliminated(n: &Netlist, forced: &[(NetId, bool)]) -> Result<usize> {
    let order = n.topo_order()?;
    let mut val: Vec<Val> = (0..n.num_nets()).map(|i| Val::Root(NetId(i as u32))).collect();
    let force = |val: &mut Vec<Val>| {
        for &(net, b) in forced {
            val[net.index()] = Val::Const(b);
        }
    };
    force(&mut val);
    let lib = n.library();
    for &c in &order {
        let cell = n.cell(c);
        let gt = lib.get(cell.ty);
        if gt.is_ff() {
            continue;
        }
        let mut roots: Vec<NetId> = Vec::new();
        let mut words = Vec::with_capacity(cell.inputs.len());
        for &i in &cell.inputs {
            words.push(match val[i.index()] {
                Val::Const(b) => {
                    if b {
                        !0
                    } else {
                        0
                    }
                }
                Val::Root(r) => {
                    let j = roots.iter().position(|&x| x == r).unwrap_or_else(|| {
                        roots.push(r);
                        roots.len() - 1
                    });
                    column(j)
                }
            });
        }
        // Only constants simplify a cell; plain buffers are left alone.
        let has_const = cell.inputs.iter().any(|i| matches!(val[i.index()], Val::Const(_)));
        if !has_const || roots.len() > 6 {
            continue;
        }
        let mask = if roots.len() == 6 { !0 } else { (1u64 << (1 << roots.len())) - 1 };
        for (k, e) in gt.outputs.iter().enumerate() {
            let w = e.eval(&words, 0) & mask;
            let o = cell.outputs[k];
            val[o.index()] = if w == 0 {
                Val::Const(false)
            } else if w == mask {
                Val::Const(true)
            } else if let Some(j) = (0..roots.len()).find(|&j| column(j) & mask == w) {
                Val::Root(roots[j])
            } else {
                Val::Root(o)
            };
        }
        force(&mut val);
    }

    let mut live = vec![false; n.num_cells()];
    let mut stack: Vec<NetId> = Vec::new();
    let push = |stack: &mut Vec<NetId>, v: Val| {
        if let Val::Root(r) = v {
            stack.push(r);
        }
    };
    for &p in n.pos() {
        push(&mut stack, val[p.index()]);
    }
    for f in n.ffs() {
        live[f.index()] = true;
        push(&mut stack, val[n.cell(f).inputs[0].index()]);
    }
    while let Some(r) = stack.pop() {
        let Some(d) = n.driver_cell(r) else { continue };
        if live[d.index()] {
            continue;
        }
        live[d.index()] = true;
        for &i in &n.cell(d).inputs {
            push(&mut stack, val[i.index()]);
        }
    }

    let mut consumers: HashMap<NetId, usize> = HashMap::new();
    for (id, c) in n.cells() {
        if live[id.index()] {
            for &i in &c.inputs {
                if let Val::Root(r) = val[i.index()] {
                    *consumers.entry(r).or_default() += 1;
                }
            }
        }
    }
    for &p in n.pos() {
        if let Val::Root(r) = val[p.index()] {
            *consumers.entry(r).or_default() += 1;
        }
    }
    let absorbed = n
        .cells()
        .filter(|(id, c)| {
            if !live[id.index()] || lib.get(c.ty).kind != CellKind::Inv {
                return false;
            }
            let Val::Root(x) = val[c.inputs[0].index()] else { return false };
            let Some(d) = n.driver_cell(x) else { return false };
            let dt = n.gate_type(d);
            live[d.index()] && dt.outputs.len() == 1 && dt.complement.is_some() && consumers.get(&x) == Some(&1)
        })
        .count();
    Ok(live.iter().filter(|&&l| !l).count() + absorbed)
}

/// Truth-table column of variable `j` over 6 variables.
fn column(j: usize) -> u64 {
    const COLS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    COLS[j]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProbeResult {
    pub key_index: usize,
    /// Extra cells eliminated with the select tied low.
    pub eliminated0: usize,
    /// Extra cells eliminated with the select tied high.
    pub eliminated1: usize,
}

impl ProbeResult {
    pub fn signal(&self) -> usize {
        self.eliminated0.abs_diff(self.eliminated1)
    }
}

/// Tie key select `index` to 0 and to 1 and count the cells each tie lets
/// synthesis remove, relative to the untied design. Flops are never
/// constant, so the key register contributes nothing.
pub fn constant_prop_probe(n: &Netlist, index: usize) -> Result<ProbeResult> {
    let selects = n.key_selects();
    let &sel = selects.get(index).ok_or(Error::InvalidKeyIndex(index))?;
    let base = eliminated(n, &[])?;
    let e0 = eliminated(n, &[(sel, false)])?;
    let e1 = eliminated(n, &[(sel, true)])?;
    Ok(ProbeResult { key_index: index, eliminated0: e0.saturating_sub(base), eliminated1: e1.saturating_sub(base) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::parse_netlist;
    use crate::library::CellLibrary;
    use crate::locking::lock_cell_config;
    use crate::sim::{check_equivalence, simulate, EquivMode};
    use std::sync::Arc;

    fn lib() -> Arc<CellLibrary> {
        Arc::new(CellLibrary::builtin())
    }

    fn exhaustive_equal(text: &str) {
        let n = parse_netlist(text, lib()).unwrap();
        let e = parse_netlist(&export_bench(&n, &ExportOptions::default()).unwrap(), lib()).unwrap();
        let v = check_equivalence(&n, &e, &Key::default(), EquivMode::Exhaustive, 1).unwrap();
        assert!(v.is_equivalent(), "{text}");
        assert_eq!(v.vectors_tested, 1 << n.pis().len());
    }

    #[test]
    fn mux_expansion() {
        let text = "INPUT(a)\nINPUT(b)\nINPUT(s)\nOUTPUT(y)\ny = MUX2(a,b,s)\n";
        let n = parse_netlist(text, lib()).unwrap();
        let out = export_bench(&n, &ExportOptions::default()).unwrap();
        assert_eq!(out.lines().filter(|l| l.contains(" = ")).count(), 4);
        let e = parse_netlist(&out, lib()).unwrap();
        let y = e.find_net("y").unwrap();
        for row in 0..8 {
            let (a, b, s) = (row & 1 == 1, row & 2 == 2, row & 4 == 4);
            let got = simulate(&e, &[vec![a, b, s]], &[]).unwrap()[0][y.index()];
            assert_eq!(got, if s { b } else { a }, "row {row}");
        }
        exhaustive_equal(text);
    }

    #[test]
    fn complex_expansion() {
        exhaustive_equal("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\ny = AOI21(a,b,c)\n");
        exhaustive_equal("INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(d)\nOUTPUT(y)\ny = OAI22(a,b,c,d)\n");
        exhaustive_equal("INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(z)\ny = XNOR2(a,b)\nz = BUF(a)\n");
    }

    #[test]
    fn nand_fixed_point() {
        let n = parse_netlist(crate::corpus::C17, lib()).unwrap();
        let out = export_bench(&n, &ExportOptions::default()).unwrap();
        assert_eq!(out.lines().filter(|l| l.contains(" = NAND(")).count(), 6);
        assert_eq!(out.lines().filter(|l| l.contains(" = ")).count(), 6);
    }

    #[test]
    fn tie_cells_rejected() {
        let n = parse_netlist("OUTPUT(y)\ny = TIE1()\n", lib()).unwrap();
        assert!(matches!(export_bench(&n, &ExportOptions::default()), Err(Error::NoDecomposition(..))));
    }

    #[test]
    fn pseudo_io() {
        let n = parse_netlist(crate::corpus::S27, lib()).unwrap();
        let out = export_bench(&n, &ExportOptions { ffs_as_pseudo_io: true }).unwrap();
        assert!(!out.contains("DFF"));
        let e = parse_netlist(&out, lib()).unwrap();
        assert_eq!(e.pis().len(), n.pis().len() + 3);
        assert_eq!(e.pos().len(), n.pos().len() + 3);
    }

    #[test]
    fn frequency_argmax() {
        let mut text = String::from("INPUT(a)\nINPUT(b)\nINPUT(__tmx_key0)\nOUTPUT(z)\n");
        for i in 0..10 {
            text += &format!("OUTPUT(ia{i})\nta{i} = AND2(a,b)\nia{i} = INV(ta{i})\n");
        }
        text += "OUTPUT(ib)\ntb = NAND2(a,b)\nib = INV(tb)\n";
        text += "p = AND2(a,b)\nq = NAND2(a,b)\nm = MUX2(p,q,__tmx_key0)  # cell=__tmx_mux0\nz = INV(m)\n";
        let n = parse_netlist(&text, lib()).unwrap();
        let s = local_structure_attack(&n, DEFAULT_X_THRESHOLD).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].prediction, Prediction::Zero);
        let no_mux = parse_netlist("INPUT(a)\nOUTPUT(b)\nb = INV(a)\n", lib()).unwrap();
        assert!(matches!(local_structure_attack(&no_mux, 0.1), Err(Error::NoKeyMuxes)));
    }

    #[test]
    fn scoring() {
        use Prediction::*;
        let key: Key = "0110".parse().unwrap();
        let r = score_attack(&[Zero, One, One, Zero], &key).unwrap();
        assert_eq!((r.ac, r.pc, r.kpa), (100.0, 100.0, Some(100.0)));
        let r = score_attack(&[X, X, X, X], &key).unwrap();
        assert_eq!((r.ac, r.pc, r.kpa), (0.0, 100.0, None));
        assert!(score_attack(&[X], &key).is_err());

        let key = Key(vec![false; 214]);
        let mut preds = vec![X; 214];
        preds[0] = Zero;
        let r = score_attack(&preds, &key).unwrap();
        assert_eq!(r.kpa, Some(100.0));
        assert!((r.ac - 0.47).abs() < 0.005);
        assert_eq!(r.x_count, 213);
    }

    #[test]
    fn probe_symmetric_on_every_configuration() {
        let text = "INPUT(a)\nINPUT(b)\nOUTPUT(y)\nOUTPUT(w)\nx = AND2(a,b)\ny = NAND2(x,a)\nw = INV(x)\n";
        for config in 1..=4u8 {
            let mut n = parse_netlist(text, lib()).unwrap();
            let x = n.find_cell("x").unwrap();
            lock_cell_config(&mut n, x, config).unwrap();
            let p = constant_prop_probe(&n, 0).unwrap();
            assert_eq!((p.eliminated0, p.eliminated1), (2, 2), "config {config}");
            assert_eq!(p.signal(), 0);
        }
    }

    #[test]
    fn probe_asymmetric_cone() {
        let text = "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(keyinput0)\nOUTPUT(y)\n\
                    g1 = NAND2(a,b)\ng2 = NAND2(b,c)\ng3 = NAND2(g1,g2)\ng4 = NAND2(g3,a)\ng5 = NAND2(g4,c)\n\
                    y = MUX2(g5,b,keyinput0)\n";
        let n = parse_netlist(text, lib()).unwrap();
        let p = constant_prop_probe(&n, 0).unwrap();
        assert_eq!((p.eliminated0, p.eliminated1), (1, 6));
        assert_eq!(p.signal(), 5);
        assert!(matches!(constant_prop_probe(&n, 1), Err(Error::InvalidKeyIndex(1))));
    }
}
