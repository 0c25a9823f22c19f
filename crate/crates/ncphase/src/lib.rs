//! Limit sweeps, configuration, report writers and SVG output on top of
//! `ncphase-core`.

pub mod config;
pub mod families;
pub mod limits;
pub mod report;
pub mod run;
pub mod svg;
