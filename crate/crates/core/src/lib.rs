//! Layered resource → equipment → generation → capability dependency graphs,
//! lagged capability dynamics, and the diagnostics built on them.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod fixtures;
pub mod graph;
pub mod grid;
pub mod report;
pub mod scenario;
pub mod signals;
pub mod validation;
