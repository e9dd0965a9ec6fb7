//! `metspec`: runs metric spectral experiments described by TOML configs and
//! writes CSV tables with a JSON pass/fail report.

pub mod build;
pub mod catalog;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
