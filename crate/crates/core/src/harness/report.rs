use std::io::{self, Write};

use super::config::{EtaChoice, GameConfig, GameMode, LossMode};
use super::csv::fmt_g12;
use super::game::estimate_regret;
use crate::adversaries::AdversaryKind;
use crate::algorithms::{regret_bound_value, Algorithm, BoundMode, BoundSpec, Regime};
use crate::error::{Error, Result};

/// One problem size and game length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub n: usize,
    pub k: usize,
    pub regime: Regime,
    pub mode: BoundMode,
}

/// Games to play at each grid point, one per algorithm, with tuned rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub adversary: AdversaryKind,
    pub seeds: Vec<u64>,
    pub loss_mode: LossMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry {
    pub algorithm: Algorithm,
    /// `None` when no closed form applies to this mode.
    pub bound: Option<f64>,
    pub measured: Option<f64>,
    pub measured_std_error: Option<f64>,
}

impl BoundEntry {
    /// Measured mean regret over the bound.
    pub fn ratio(&self) -> Option<f64> {
        Some(self.measured? / self.bound?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub point: BoundPoint,
    pub entries: Vec<BoundEntry>,
}

impl BoundRow {
    pub fn entry(&self, algorithm: Algorithm) -> &BoundEntry {
        self.entries.iter().find(|e| e.algorithm == algorithm).expect("every algorithm has an entry")
    }
}

const ALGORITHMS: [Algorithm; 3] = [Algorithm::LossMeg, Algorithm::GainMeg, Algorithm::Gd];

/// Closed-form bounds of all three learners at every grid point, and
/// optionally their measured mean regret with tuned learning rates.
pub fn bound_report(grid: &[BoundPoint], measurement: Option<&Measurement>) -> Result<Vec<BoundRow>> {
    grid.iter()
        .map(|&point| {
            let entries = ALGORITHMS
                .iter()
                .map(|&algorithm| entry(point, algorithm, measurement))
                .collect::<Result<Vec<_>>>()?;
            Ok(BoundRow { point, entries })
        })
        .collect()
}

fn entry(point: BoundPoint, algorithm: Algorithm, measurement: Option<&Measurement>) -> Result<BoundEntry> {
    let spec = BoundSpec { algorithm, regime: point.regime, mode: point.mode, n: point.n, k: point.k };
    let bound = match regret_bound_value(&spec) {
        Ok(b) => Some(b),
        Err(Error::UnsupportedSpec(_)) => None,
        Err(e) => return Err(e),
    };
    let mut out = BoundEntry { algorithm, bound, measured: None, measured_std_error: None };
    let Some(measure) = measurement else {
        return Ok(out);
    };
    let mode = match point.mode {
        BoundMode::Horizon(t) => GameMode::Horizon(t as usize),
        BoundMode::Budget(b) => GameMode::Budget(b),
        BoundMode::GainBudget(_) => return Ok(out),
    };
    let mut config = GameConfig::new(point.n, point.k, mode, algorithm, measure.adversary);
    config.regime = Some(point.regime);
    config.eta = EtaChoice::Auto;
    config.seeds = measure.seeds.clone();
    config.loss_mode = measure.loss_mode;
    match estimate_regret(&config) {
        Ok(e) => {
            out.measured = Some(e.mean);
            out.measured_std_error = Some(e.std_error);
        }
        // No tuned rate for this learner in this mode.
        Err(Error::UnsupportedSpec(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(out)
}

pub const REPORT_HEADER: &str = "n,k,regime,mode,length,algorithm,bound,measured,std_error,ratio";

pub fn write_report<W: Write>(out: &mut W, rows: &[BoundRow]) -> io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    let opt = |x: Option<f64>| x.map(fmt_g12).unwrap_or_default();
    for row in rows {
        let p = row.point;
        let (mode, length) = match p.mode {
            BoundMode::Horizon(t) => ("horizon", t),
            BoundMode::Budget(b) => ("budget", b),
            BoundMode::GainBudget(g) => ("gain-budget", g),
        };
        for e in &row.entries {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                p.n,
                p.k,
                p.regime,
                mode,
                fmt_g12(length),
                e.algorithm,
                opt(e.bound),
                opt(e.measured),
                opt(e.measured_std_error),
                opt(e.ratio())
            )?;
        }
    }
    Ok(())
}
