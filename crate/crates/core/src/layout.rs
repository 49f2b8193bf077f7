//! Row/site placement model.
//!
//! A floorplan is a grid of uniform sites. Cells occupy an integral number of
//! sites; only totals are tracked, not positions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::netlist::Netlist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Floorplan {
    pub rows: u32,
    pub sites_per_row: u32,
}

impl Floorplan {
    pub fn new(rows: u32, sites_per_row: u32) -> Self {
        Floorplan { rows, sites_per_row }
    }

    pub fn total_sites(&self) -> u64 {
        u64::from(self.rows) * u64::from(self.sites_per_row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteUsage {
    pub total: u64,
    pub occupied: u64,
    pub open: u64,
    pub utilization: f64,
}

/// Occupied and open sites of `n` placed on `fp`.
pub fn site_usage(n: &Netlist, fp: &Floorplan) -> Result<SiteUsage> {
    usage_for_width(n.total_width(), fp)
}

pub fn usage_for_width(occupied: u64, fp: &Floorplan) -> Result<SiteUsage> {
    let total = fp.total_sites();
    if occupied > total {
        return Err(Error::Overflow { needed: occupied, total });
    }
    let utilization = if total == 0 { 0.0 } else { occupied as f64 / total as f64 };
    Ok(SiteUsage { total, occupied, open: total - occupied, utilization })
}

/// Smallest near-square floorplan holding `n` at no more than `target`
/// utilization.
pub fn make_floorplan(n: &Netlist, target: f64) -> Result<Floorplan> {
    floorplan_for_width(n.total_width(), target)
}

pub fn floorplan_for_width(width: u64, target: f64) -> Result<Floorplan> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidTarget(target));
    }
    let needed = ((width as f64 / target).ceil() as u64).max(1);
    let side = (needed as f64).sqrt().ceil() as u64;
    let rows = needed.div_ceil(side);
    Ok(Floorplan::new(rows as u32, side as u32))
}
