//! Netlist hardening with MUX-based logic locking.
//!
//! The crate parses gate-level netlists (BENCH) against a cell library,
//! estimates timing slack and net controllability, selects cells to lock so
//! that open placement sites are filled without hurting timing, inserts
//! locking instances driven by a key shift register, and evaluates the
//! result against oracle-less attacks.

pub mod bench;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod key;
pub mod layout;
pub mod library;
pub mod locking;
pub mod netlist;
pub mod sim;
pub mod timing;

pub use bench::{parse_netlist, write_netlist};
pub use error::{Error, Result};
pub use key::Key;
pub use library::{CellKind, CellLibrary, GateType, TypeId};
pub use netlist::{CellId, Direction, NetId, Netlist};
pub use layout::{Floorplan, SiteUsage};
pub use sim::ToggleProfile;
pub use timing::TimingReport;
pub use locking::{harden, HardenedDesign, LockingConfig, Scheme, TroMuxRecord};
