//! Benchmark circuits: the public ISCAS c17 and s27, plus seeded random
//! circuits with ISCAS-like size and gate mix standing in for the larger
//! benchmarks.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::parse_netlist;
use crate::error::Result;
use crate::library::CellLibrary;
use crate::netlist::Netlist;

pub const C17: &str = "\
# c17
INPUT(1)
INPUT(2)
INPUT(3)
INPUT(6)
INPUT(7)
OUTPUT(22)
OUTPUT(23)
10 = NAND(1, 3)
11 = NAND(3, 6)
16 = NAND(2, 11)
19 = NAND(11, 7)
22 = NAND(10, 16)
23 = NAND(16, 19)
";

pub const S27: &str = "\
# s27
INPUT(G0)
INPUT(G1)
INPUT(G2)
INPUT(G3)
OUTPUT(G17)
G5 = DFF(G10)
G6 = DFF(G11)
G7 = DFF(G13)
G14 = NOT(G0)
G17 = NOT(G11)
G8 = AND(G14, G6)
G15 = OR(G12, G8)
G16 = OR(G3, G8)
G9 = NAND(G16, G15)
G10 = NOR(G14, G11)
G11 = NOR(G5, G9)
G12 = NOR(G1, G7)
G13 = NOR(G2, G12)
";

/// Size parameters for a random circuit.
#[derive(Debug, Clone, Copy)]
pub struct SynthSpec {
    pub inputs: usize,
    pub outputs: usize,
    pub gates: usize,
    pub ffs: usize,
    pub seed: u64,
}

/// (gate type, relative weight)
const GATE_MIX: &[(&str, u32)] = &[
    ("NAND2", 22),
    ("NOR2", 8),
    ("AND2", 14),
    ("OR2", 8),
    ("INV", 12),
    ("BUF", 3),
    ("NAND3", 5),
    ("AND3", 4),
    ("NOR3", 2),
    ("OR3", 2),
    ("NAND4", 2),
    ("XOR2", 5),
    ("XNOR2", 3),
    ("AOI21", 4),
    ("OAI21", 4),
    ("AOI22", 2),
];

/// Build a random levelized circuit. Gate inputs favour recently created
/// nets so logic depth grows with size; every dangling gate output becomes
/// a primary output.
pub fn synthesize(spec: SynthSpec, lib: Arc<CellLibrary>) -> Netlist {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut n = Netlist::new(lib.clone());
    let mut pool = Vec::new();
    for i in 0..spec.inputs {
        pool.push(n.add_pi(&format!("I{i}")).expect("fresh"));
    }
    let ff_q: Vec<_> = (0..spec.ffs).map(|i| n.add_net(format!("R{i}")).expect("fresh")).collect();
    pool.extend(&ff_q);

    let total: u32 = GATE_MIX.iter().map(|(_, w)| w).sum();
    for g in 0..spec.gates {
        let mut pick = rng.random_range(0..total);
        let ty_name = GATE_MIX
            .iter()
            .find(|(_, w)| {
                if pick < *w {
                    true
                } else {
                    pick -= w;
                    false
                }
            })
            .map(|(t, _)| *t)
            .unwrap();
        let ty = lib.lookup(ty_name).expect("gate in builtin library");
        let arity = lib.get(ty).arity.min(pool.len());
        let ty = if arity < lib.get(ty).arity { lib.inv() } else { ty };
        let arity = lib.get(ty).arity;
        let mut ins = Vec::with_capacity(arity);
        while ins.len() < arity {
            let idx = if rng.random_bool(0.7) {
                let back = (rng.random::<f64>().powi(3) * 24.0) as usize;
                pool.len() - 1 - back.min(pool.len() - 1)
            } else {
                rng.random_range(0..pool.len())
            };
            if !ins.contains(&pool[idx]) || pool.len() < arity {
                ins.push(pool[idx]);
            }
        }
        let out = n.add_net(format!("N{g}")).expect("fresh");
        n.add_cell(format!("N{g}"), ty, ins, vec![out]).expect("valid cell");
        pool.push(out);
    }

    let gate_nets: Vec<_> = pool[spec.inputs + spec.ffs..].to_vec();
    for (i, &q) in ff_q.iter().enumerate() {
        let late = gate_nets.len().saturating_sub(gate_nets.len() / 3 + 1);
        let d = if gate_nets.is_empty() { pool[0] } else { gate_nets[rng.random_range(late..gate_nets.len())] };
        n.add_cell(format!("R{i}"), lib.ff(), vec![d], vec![q]).expect("valid flop");
    }

    let mut outs: Vec<_> = gate_nets.iter().copied().filter(|&id| n.net(id).sinks.is_empty()).collect();
    let mut k = gate_nets.len();
    while outs.len() < spec.outputs && k > 0 {
        k -= 1;
        if !outs.contains(&gate_nets[k]) {
            outs.push(gate_nets[k]);
        }
    }
    for o in outs {
        let name = n.net(o).name.clone();
        n.add_po(&name);
    }
    n.validate().expect("synthesized netlist is valid");
    n
}

/// Named corpus entries.
pub const CORPUS: &[&str] = &["c17", "s27", "c432_like", "c880_like", "s344_like"];

/// Larger designs used where many key bits are needed.
pub const LARGE: &[&str] = &["c2670_like", "s1238_like"];

pub fn spec_for(name: &str) -> Option<SynthSpec> {
    let s = |inputs, outputs, gates, ffs, seed| SynthSpec { inputs, outputs, gates, ffs, seed };
    Some(match name {
        "c432_like" => s(36, 7, 160, 0, 432),
        "c880_like" => s(60, 26, 383, 0, 880),
        "s344_like" => s(9, 11, 160, 15, 344),
        "c2670_like" => s(157, 64, 1193, 0, 2670),
        "s1238_like" => s(14, 14, 508, 18, 1238),
        _ => return None,
    })
}

/// Load a corpus design by name.
pub fn load(name: &str, lib: Arc<CellLibrary>) -> Result<Netlist> {
    match name {
        "c17" => parse_netlist(C17, lib),
        "s27" => parse_netlist(S27, lib),
        _ => {
            let spec = spec_for(name).ok_or_else(|| crate::error::Error::UnknownNet(name.to_string()))?;
            Ok(synthesize(spec, lib))
        }
    }
}
