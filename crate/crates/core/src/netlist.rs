//! Gate-level netlist graph.
//!
//! Cells and nets live in flat vectors addressed by [`CellId`] / [`NetId`].
//! Ids are stable: transformations only append, so analyses computed on an
//! earlier snapshot can still be indexed after later edits.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::library::{CellKind, CellLibrary, GateType, TypeId};

/// Prefix reserved for cells and nets inserted by the locking flow.
pub const RESERVED_PREFIX: &str = "__tmx_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetId(pub u32);

impl CellId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl NetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An input pin of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pin {
    pub cell: CellId,
    pub pin: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Driver {
    /// Primary input.
    Input,
    /// Output `pin` of `cell`.
    Cell { cell: CellId, pin: u32 },
}

#[derive(Debug, Clone)]
pub struct Net {
    pub name: String,
    /// `None` only transiently while an edit is in progress.
    pub driver: Option<Driver>,
    pub sinks: Vec<Pin>,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub name: String,
    pub ty: TypeId,
    pub inputs: Vec<NetId>,
    pub outputs: Vec<NetId>,
}

/// Which way [`Netlist::cone`] walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Fanin,
    Fanout,
}

#[derive(Debug, Clone)]
pub struct Netlist {
    lib: Arc<CellLibrary>,
    cells: Vec<Cell>,
    nets: Vec<Net>,
    pis: Vec<NetId>,
    pos: Vec<NetId>,
    clock: String,
    net_names: HashMap<String, NetId>,
    cell_names: HashMap<String, CellId>,
}

pub fn is_reserved(name: &str) -> bool {
    name.starts_with(RESERVED_PREFIX)
}

impl Netlist {
    pub fn new(lib: Arc<CellLibrary>) -> Self {
        Netlist {
            lib,
            cells: Vec::new(),
            nets: Vec::new(),
            pis: Vec::new(),
            pos: Vec::new(),
            clock: "CLK".to_string(),
            net_names: HashMap::new(),
            cell_names: HashMap::new(),
        }
    }

    pub fn library(&self) -> &CellLibrary {
        &self.lib
    }

    pub fn library_arc(&self) -> &Arc<CellLibrary> {
        &self.lib
    }

    pub fn clock(&self) -> &str {
        &self.clock
    }

    pub fn set_clock(&mut self, name: impl Into<String>) {
        self.clock = name.into();
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = (CellId, &Cell)> {
        self.cells.iter().enumerate().map(|(i, c)| (CellId(i as u32), c))
    }

    pub fn nets(&self) -> impl ExactSizeIterator<Item = (NetId, &Net)> {
        self.nets.iter().enumerate().map(|(i, n)| (NetId(i as u32), n))
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_nets(&self) -> usize {
        self.nets.len()
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn net(&self, id: NetId) -> &Net {
        &self.nets[id.index()]
    }

    pub fn gate_type(&self, id: CellId) -> &GateType {
        self.lib.get(self.cells[id.index()].ty)
    }

    pub fn pis(&self) -> &[NetId] {
        &self.pis
    }

    pub fn pos(&self) -> &[NetId] {
        &self.pos
    }

    pub fn is_po(&self, net: NetId) -> bool {
        self.pos.contains(&net)
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.net_names.get(name).copied()
    }

    pub fn find_cell(&self, name: &str) -> Option<CellId> {
        self.cell_names.get(name).copied()
    }

    pub fn net_id(&self, name: &str) -> Result<NetId> {
        self.find_net(name).ok_or_else(|| Error::UnknownNet(name.to_string()))
    }

    pub fn cell_id(&self, name: &str) -> Result<CellId> {
        self.find_cell(name).ok_or_else(|| Error::UnknownCell(name.to_string()))
    }

    pub fn is_ff(&self, cell: CellId) -> bool {
        self.gate_type(cell).kind == CellKind::Ff
    }

    /// Cells that are part of inserted locking hardware.
    pub fn is_internal(&self, cell: CellId) -> bool {
        is_reserved(&self.cells[cell.index()].name)
    }

    pub fn ffs(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells().filter(|(id, _)| self.is_ff(*id)).map(|(id, _)| id)
    }

    /// The cell driving `net`, if any.
    pub fn driver_cell(&self, net: NetId) -> Option<CellId> {
        match self.nets[net.index()].driver {
            Some(Driver::Cell { cell, .. }) => Some(cell),
            _ => None,
        }
    }

    /// Total placement width of all cells.
    pub fn total_width(&self) -> u64 {
        self.cells.iter().map(|c| u64::from(self.lib.width(c.ty))).sum()
    }

    // ----- editing -----

    /// Create an undriven net.
    pub fn add_net(&mut self, name: impl Into<String>) -> Result<NetId> {
        let name = name.into();
        if self.net_names.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let id = NetId(self.nets.len() as u32);
        self.net_names.insert(name.clone(), id);
        self.nets.push(Net { name, driver: None, sinks: Vec::new() });
        Ok(id)
    }

    fn net_or_create(&mut self, name: &str) -> NetId {
        match self.find_net(name) {
            Some(id) => id,
            None => self.add_net(name).expect("name is fresh"),
        }
    }

    /// Declare `name` as a primary input, creating the net if needed.
    pub fn add_pi(&mut self, name: &str) -> Result<NetId> {
        let id = self.net_or_create(name);
        self.set_driver(id, Driver::Input)?;
        self.pis.push(id);
        Ok(id)
    }

    pub fn add_po(&mut self, name: &str) -> NetId {
        let id = self.net_or_create(name);
        if !self.pos.contains(&id) {
            self.pos.push(id);
        }
        id
    }

    fn set_driver(&mut self, net: NetId, driver: Driver) -> Result<()> {
        let n = &mut self.nets[net.index()];
        if n.driver.is_some() {
            return Err(Error::MultipleDrivers(n.name.clone()));
        }
        n.driver = Some(driver);
        Ok(())
    }

    /// Add a cell connected to existing (or implicitly created) nets by name.
    pub fn add_cell_by_names(&mut self, name: &str, ty: TypeId, inputs: &[&str], outputs: &[&str]) -> Result<CellId> {
        let ins: Vec<NetId> = inputs.iter().map(|n| self.net_or_create(n)).collect();
        let outs: Vec<NetId> = outputs.iter().map(|n| self.net_or_create(n)).collect();
        self.add_cell(name, ty, ins, outs)
    }

    /// Add a cell; its output nets must currently be undriven.
    pub fn add_cell(&mut self, name: impl Into<String>, ty: TypeId, inputs: Vec<NetId>, outputs: Vec<NetId>) -> Result<CellId> {
        let name = name.into();
        let t = self.lib.get(ty);
        if inputs.len() != t.arity || outputs.len() != t.outputs.len() {
            return Err(Error::InvalidGateType(
                t.name.clone(),
                format!("cell `{name}` has {} inputs / {} outputs, expected {} / {}", inputs.len(), outputs.len(), t.arity, t.outputs.len()),
            ));
        }
        if let Some(&o) = outputs.iter().find(|o| self.nets[o.index()].driver.is_some()) {
            return Err(Error::MultipleDrivers(self.nets[o.index()].name.clone()));
        }
        if self.cell_names.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let id = CellId(self.cells.len() as u32);
        for (pin, &o) in outputs.iter().enumerate() {
            self.set_driver(o, Driver::Cell { cell: id, pin: pin as u32 })?;
        }
        for (pin, &i) in inputs.iter().enumerate() {
            self.nets[i.index()].sinks.push(Pin { cell: id, pin: pin as u32 });
        }
        self.cell_names.insert(name.clone(), id);
        self.cells.push(Cell { name, ty, inputs, outputs });
        Ok(id)
    }

    /// Swap a cell's gate type for one with the same pin counts.
    pub fn set_cell_type(&mut self, cell: CellId, ty: TypeId) {
        let t = self.lib.get(ty);
        let c = &mut self.cells[cell.index()];
        assert_eq!(t.arity, c.inputs.len());
        assert_eq!(t.outputs.len(), c.outputs.len());
        c.ty = ty;
    }

    /// Point output `pin` of `cell` at the undriven net `net`; the net it
    /// drove before is left undriven.
    pub fn reconnect_output(&mut self, cell: CellId, pin: usize, net: NetId) -> Result<NetId> {
        let old = self.cells[cell.index()].outputs[pin];
        self.set_driver(net, Driver::Cell { cell, pin: pin as u32 })?;
        self.nets[old.index()].driver = None;
        self.cells[cell.index()].outputs[pin] = net;
        Ok(old)
    }

    /// Stop treating `net` as a primary input; the net becomes undriven.
    pub fn remove_pi(&mut self, net: NetId) {
        self.pis.retain(|&n| n != net);
        if self.nets[net.index()].driver == Some(Driver::Input) {
            self.nets[net.index()].driver = None;
        }
    }

    // ----- validation and traversal -----

    /// Check every structural invariant.
    pub fn validate(&self) -> Result<()> {
        for (id, n) in self.nets() {
            if n.driver.is_none() && (!n.sinks.is_empty() || self.is_po(id)) {
                return Err(Error::UndefinedNet(n.name.clone()));
            }
        }
        self.topo_order().map(|_| ())
    }

    /// Combinational cells in evaluation order. Flops are sources, not part
    /// of the order.
    pub fn topo_order(&self) -> Result<Vec<CellId>> {
        let n = self.cells.len();
        let mut pending = vec![0usize; n];
        let mut ready = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            if self.lib.get(c.ty).is_ff() {
                continue;
            }
            pending[i] = c
                .inputs
                .iter()
                .filter(|&&net| matches!(self.nets[net.index()].driver, Some(Driver::Cell { cell, .. }) if !self.is_ff(cell)))
                .count();
            if pending[i] == 0 {
                ready.push(CellId(i as u32));
            }
        }
        ready.reverse();
        let mut order = Vec::with_capacity(n);
        while let Some(c) = ready.pop() {
            order.push(c);
            for &o in &self.cells[c.index()].outputs {
                for s in &self.nets[o.index()].sinks {
                    if self.is_ff(s.cell) {
                        continue;
                    }
                    let p = &mut pending[s.cell.index()];
                    *p -= 1;
                    if *p == 0 {
                        ready.push(s.cell);
                    }
                }
            }
        }
        let comb = self.cells.iter().filter(|c| !self.lib.get(c.ty).is_ff()).count();
        if order.len() != comb {
            let stuck = (0..n).find(|&i| pending[i] > 0).expect("some cell is stuck");
            let net = self.cells[stuck].outputs.first().copied();
            let name = net.map_or_else(|| self.cells[stuck].name.clone(), |o| self.nets[o.index()].name.clone());
            return Err(Error::CombinationalCycle(name));
        }
        Ok(order)
    }

    /// Transitive fan-in or fan-out of `net`, excluding `net` itself. With
    /// `cross_ff` unset the walk stops at flop boundaries: a flop's D net is
    /// reached going forward and its Q net going backward, but never passed.
    pub fn cone(&self, net: NetId, dir: Direction, cross_ff: bool) -> Result<HashSet<NetId>> {
        if net.index() >= self.nets.len() {
            return Err(Error::UnknownNet(format!("#{}", net.0)));
        }
        let mut seen = HashSet::new();
        let mut stack = vec![net];
        while let Some(n) = stack.pop() {
            let next: Vec<NetId> = match dir {
                Direction::Fanout => self.nets[n.index()]
                    .sinks
                    .iter()
                    .filter(|s| cross_ff || !self.is_ff(s.cell))
                    .flat_map(|s| self.cells[s.cell.index()].outputs.iter().copied())
                    .collect(),
                Direction::Fanin => match self.nets[n.index()].driver {
                    Some(Driver::Cell { cell, .. }) if cross_ff || !self.is_ff(cell) => self.cells[cell.index()].inputs.clone(),
                    _ => Vec::new(),
                },
            };
            for m in next {
                if m != net && seen.insert(m) {
                    stack.push(m);
                }
            }
        }
        Ok(seen)
    }

    /// Cone lookup by net name.
    pub fn cone_by_name(&self, net: &str, dir: Direction, cross_ff: bool) -> Result<Vec<String>> {
        let id = self.net_id(net)?;
        let mut names: Vec<String> = self.cone(id, dir, cross_ff)?.into_iter().map(|n| self.nets[n.index()].name.clone()).collect();
        names.sort();
        Ok(names)
    }

    /// Key-select nets ordered by key index: `__tmx_key<i>` nets, or
    /// `keyinput<i>` primary inputs in exported designs.
    pub fn key_selects(&self) -> Vec<NetId> {
        let mut keyed: Vec<(usize, NetId)> = self
            .nets()
            .filter_map(|(id, n)| {
                let idx = n
                    .name
                    .strip_prefix("__tmx_key")
                    .or_else(|| n.name.strip_prefix("keyinput"))?
                    .parse::<usize>()
                    .ok()?;
                Some((idx, id))
            })
            .collect();
        keyed.sort();
        keyed.into_iter().map(|(_, id)| id).collect()
    }

    /// Name-independent structural signature used by round-trip checks:
    /// per-cell (name, type, input names, output names), sorted.
    pub fn signature(&self) -> Vec<(String, String, Vec<String>, Vec<String>)> {
        let mut sig: Vec<_> = self
            .cells
            .iter()
            .map(|c| {
                let names = |v: &Vec<NetId>| v.iter().map(|n| self.nets[n.index()].name.clone()).collect::<Vec<_>>();
                (c.name.clone(), self.lib.get(c.ty).name.clone(), names(&c.inputs), names(&c.outputs))
            })
            .collect();
        sig.sort();
        sig
    }
}
