//! Seeded games between a learner and an adversary, regret accounting,
//! learning-rate sweeps, bound tables and CSV output.
//!
//! A game draws all its randomness from one seed, split into independent
//! streams for the adversary, the subspace sampler and the rotation used
//! by matrix-mode games. Multi-seed estimates run seeds in parallel and
//! merge results in seed order, so output never depends on scheduling.

mod config;
mod csv;
mod game;
mod report;

pub use config::{
    parse_config_file, parse_list, parse_seeds, EtaChoice, GameConfig, GameMode, LossMode, Representation,
};
pub use csv::{fmt_g12, write_summaries, write_sweep, write_traces, SWEEP_HEADER, TRACE_HEADER};
pub use game::{
    comparator_deficit, estimate_regret, game_rotation, log_grid, run_game, run_game_with_eta, run_seeds, sweep_eta,
    RegretEstimate, RegretTrace, TraceRow,
};
pub use report::{bound_report, write_report, BoundEntry, BoundPoint, BoundRow, Measurement, REPORT_HEADER};
