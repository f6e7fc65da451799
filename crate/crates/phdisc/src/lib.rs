//! Command-line front end, configuration and file formats for
//! [`phdisc_core`].

pub mod app;
pub mod config;
pub mod io;
pub mod verify;

pub use config::{parse_config, ConfigError, RunConfig};
