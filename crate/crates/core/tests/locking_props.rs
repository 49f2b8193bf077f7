use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use muxlock::corpus::{self, synthesize, SynthSpec};
use muxlock::layout::{make_floorplan, Floorplan};
use muxlock::locking::{build_keychain, harden, lock_cell, lock_cell_config, LockingConfig};
use muxlock::netlist::Driver;
use muxlock::sim::{Simulator, KEYCHAIN_DIN, KEYCHAIN_LOAD};
use muxlock::{parse_netlist, CellLibrary, Key, Netlist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lib() -> Arc<CellLibrary> {
    Arc::new(CellLibrary::builtin())
}

#[test]
fn key_bits_uniform_over_4000_lockings() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut ones, mut total) = (0usize, 0usize);
    let mut seed = 0;
    while total < 4000 {
        seed += 1;
        let mut n = synthesize(SynthSpec { inputs: 16, outputs: 8, gates: 200, ffs: 10, seed }, lib());
        let ids: Vec<_> = n.cells().filter(|(_, c)| n.library().get(c.ty).is_lockable()).map(|(id, _)| id).collect();
        for id in ids {
            let r = lock_cell(&mut n, id, &mut rng).unwrap();
            ones += usize::from(r.key_bit);
            total += 1;
        }
    }
    let mean = ones as f64 / total as f64;
    let bound = 3.0 * (0.25 / total as f64).sqrt();
    assert!((mean - 0.5).abs() <= bound, "mean {mean} over {total}");
}

/// Shape of one locking instance with the gate type folded into its
/// complement class and the MUX data inputs unordered.
fn instance_shape(n: &Netlist, gate: &str, mux: &str, inv: &str) -> Vec<(String, String, Vec<String>)> {
    let lib = n.library();
    let role = |name: &str| -> String {
        match name {
            x if x == gate => "G".into(),
            x if x == mux => "M".into(),
            x if x == inv => "I".into(),
            other => other.into(),
        }
    };
    let class = |name: &str| -> String {
        let c = n.cell(n.find_cell(name).unwrap());
        let t = lib.get(c.ty);
        let mut pair = vec![t.name.clone()];
        if let Some(comp) = t.complement {
            pair.push(lib.get(comp).name.clone());
        }
        pair.sort();
        pair.join("|")
    };
    let src = |net: muxlock::NetId| -> String {
        match n.net(net).driver {
            Some(Driver::Cell { cell, .. }) => role(&n.cell(cell).name),
            _ => n.net(net).name.clone(),
        }
    };
    let mut shape = Vec::new();
    for name in [gate, mux, inv] {
        let c = n.cell(n.find_cell(name).unwrap());
        let mut ins: Vec<String> = c.inputs.iter().map(|&i| src(i)).collect();
        if name == mux {
            let sel = ins.pop().unwrap();
            let sel = if sel.starts_with("__tmx_key") { "KEY".to_string() } else { sel };
            ins.sort();
            ins.push(sel);
        }
        let out = n.net(c.outputs[0]).name.clone();
        let out = if out.starts_with("__tmx_") { "internal".to_string() } else { out };
        shape.push((role(name), class(name), [ins, vec![out]].concat()));
    }
    shape
}

#[test]
fn four_configurations_are_isomorphic() {
    let text = "INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\nOUTPUT(z)\nx = AND2(a,b)\ny = NOR2(x,c)\nz = XOR2(x,a)\n";
    let mut shapes = Vec::new();
    for config in 1..=4u8 {
        let mut n = parse_netlist(text, lib()).unwrap();
        let x = n.find_cell("x").unwrap();
        let r = lock_cell_config(&mut n, x, config).unwrap();
        shapes.push(instance_shape(&n, "x", &r.mux_cell, r.inv_cell.as_deref().unwrap()));
    }
    for s in &shapes[1..] {
        assert_eq!(s, &shapes[0]);
    }
}

fn load_and_hold(n: &Netlist, key: &Key, hold: usize) -> bool {
    let mut sim = Simulator::new(n, 1).unwrap();
    let load = n.find_net(KEYCHAIN_LOAD).unwrap();
    let din = n.find_net(KEYCHAIN_DIN).unwrap();
    let selects = n.key_selects();
    let read = |sim: &Simulator| selects.iter().zip(key.bits()).all(|(&s, &b)| (sim.value(s)[0] & 1 == 1) == b);
    sim.fill(load, !0);
    for &b in key.bits() {
        sim.fill(din, if b { !0 } else { 0 });
        sim.propagate();
        sim.clock();
    }
    sim.fill(load, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..hold {
        sim.fill(din, rng.random());
        sim.propagate();
        if !read(&sim) {
            return false;
        }
        sim.clock();
    }
    sim.propagate();
    read(&sim)
}

fn inverter_bank(k: usize) -> Netlist {
    let mut text = String::from("INPUT(a)\n");
    for i in 0..k {
        text += &format!("OUTPUT(y{i})\ny{i} = INV(a)\n");
    }
    parse_netlist(&text, lib()).unwrap()
}

#[test]
fn keychain_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in [1usize, 8, 64, 2582] {
        let orig = inverter_bank(k);
        let mut n = orig.clone();
        let mut bits = Vec::new();
        for i in 0..k {
            let id = n.find_cell(&format!("y{i}")).unwrap();
            bits.push(lock_cell(&mut n, id, &mut rng).unwrap().key_bit);
        }
        let key = Key(bits);
        build_keychain(&mut n, &key).unwrap();
        n.validate().unwrap();
        assert_eq!(n.pis().len(), orig.pis().len() + 2, "k = {k}");
        if k <= 64 {
            assert!(load_and_hold(&n, &key, 1000), "k = {k}");
            let random: Key = Key((0..k).map(|_| rng.random()).collect());
            assert!(load_and_hold(&n, &random, 10));
        }
    }
}

#[test]
fn harden_invariants_over_corpus() {
    for name in corpus::CORPUS {
        let n = corpus::load(name, lib()).unwrap();
        let fp = make_floorplan(&n, 0.5).unwrap();
        let assets: Vec<String> = n.ffs().map(|f| n.cell(f).name.clone()).collect();
        for seed in 1..=5 {
            let cfg = LockingConfig { seed, ..Default::default() };
            let h = harden(&n, &assets, &fp, &cfg).unwrap();
            let k = h.key.len();
            assert_eq!(h.records.len(), k);
            assert!(h.report.verification.as_ref().unwrap().is_equivalent());
            assert_eq!(h.locked.pis().len(), n.pis().len() + 2);

            let names: HashSet<&str> = h.records.iter().map(|r| r.locked_cell.as_str()).collect();
            assert_eq!(names.len(), k, "double locking in {name}");
            assert!(names.iter().all(|c| !c.starts_with("__tmx_")));
            for a in &assets {
                assert_eq!(h.records.iter().filter(|r| &r.locked_cell == a).count(), 1);
            }
            assert_eq!(h.report.locked_assets, assets.len());

            let selects = h.locked.key_selects();
            assert_eq!(selects.len(), k);
            for (i, r) in h.records.iter().enumerate() {
                assert_eq!(r.key_index, i);
                let drv = h.locked.driver_cell(selects[i]).unwrap();
                assert_eq!(h.locked.cell(drv).name, format!("__tmx_kc_ff{i}"));
                assert_eq!(h.key.bits()[i], r.key_bit);
            }

            let budget = u64::from(n.library().instance_width()) + u64::from(cfg.alpha);
            if !h.report.shortfall {
                assert!(h.report.open_sites_after < budget, "{name}: {} open", h.report.open_sites_after);
            }
            let inserted: u64 = h.locked.total_width() - n.total_width();
            assert_eq!(h.report.open_sites_before - h.report.open_sites_after, inserted);
        }
    }
}

#[test]
fn all_assets_locked_first() {
    let n = synthesize(SynthSpec { inputs: 8, outputs: 6, gates: 120, ffs: 10, seed: 77 }, lib());
    let assets: Vec<String> = n.ffs().map(|f| n.cell(f).name.clone()).collect();
    assert_eq!(assets.len(), 10);
    let fp = make_floorplan(&n, 0.5).unwrap();
    let h = harden(&n, &assets, &fp, &LockingConfig::default()).unwrap();
    assert_eq!((h.report.locked_assets, h.report.assets), (10, 10));
    let first: Vec<&str> = h.records[..10].iter().map(|r| r.locked_cell.as_str()).collect();
    assert_eq!(first, assets.iter().map(String::as_str).collect::<Vec<_>>());
}

#[test]
fn no_assets_runs_stage_two_only() {
    let n = corpus::load("c432_like", lib()).unwrap();
    let fp = make_floorplan(&n, 0.5).unwrap();
    let h = harden(&n, &[], &fp, &LockingConfig::default()).unwrap();
    assert_eq!(h.report.locked_assets, 0);
    assert_eq!(h.report.stage2_budget, muxlock::locking::key_length(h.report.open_sites_before, n.library(), 3));
    assert!(h.key.len() >= h.report.stage2_budget);
}

#[test]
fn harden_errors() {
    let n = corpus::load("s27", lib()).unwrap();
    let fp = make_floorplan(&n, 0.5).unwrap();
    let cfg = LockingConfig::default();
    assert!(matches!(harden(&n, &["nope".into()], &fp, &cfg), Err(muxlock::Error::UnknownAsset(_))));
    let gate = n.cells().find(|(id, _)| !n.is_ff(*id)).unwrap().1.name.clone();
    assert!(matches!(harden(&n, &[gate], &fp, &cfg), Err(muxlock::Error::NotAnFf(_))));
    assert!(matches!(harden(&n, &[], &Floorplan::new(1, 1), &cfg), Err(muxlock::Error::Overflow { .. })));
}

#[test]
fn configuration_draws_are_balanced() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    for _ in 0..400 {
        let mut n = parse_netlist("INPUT(a)\nINPUT(b)\nOUTPUT(y)\ny = NAND2(a,b)\n", lib()).unwrap();
        let y = n.find_cell("y").unwrap();
        *counts.entry(lock_cell(&mut n, y, &mut rng).unwrap().configuration).or_default() += 1;
    }
    assert_eq!(counts.len(), 4);
    assert!(counts.values().all(|&c| (60..=140).contains(&c)), "{counts:?}");
}
