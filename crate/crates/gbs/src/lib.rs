//! File formats, parallel drivers and experiment harnesses around
//! [`gbs_core`]. The `gbs` binary is a thin layer over this crate.

pub mod config;
pub mod dump;
mod error;
pub mod oracle;
pub mod parallel;
pub mod sweep;

pub use config::{Denominator, Experiment, ExperimentFile, SweepGrid, TruncationSpec};
pub use error::{CliError, CliResult};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a comma-separated photon-count list such as `1,0,2`.
pub fn parse_pattern(text: &str, ports: usize) -> CliResult<gbs_core::OutputPattern> {
    let counts = text
        .split(',')
        .map(|t| t.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("bad pattern {text:?}: {e}")))?;
    if counts.len() != ports {
        return Err(CliError::Config(format!(
            "pattern has {} entries, the experiment has {ports} ports",
            counts.len()
        )));
    }
    Ok(gbs_core::OutputPattern::new(counts))
}

/// Parses a comma-separated list of 1-based clicked ports; empty text means
/// no clicks.
pub fn parse_clicks(text: &str, ports: usize) -> CliResult<gbs_core::ClickPattern> {
    let text = text.trim().trim_start_matches('[').trim_end_matches(']');
    let mut clicked = Vec::new();
    for t in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let p: usize = t
            .parse()
            .map_err(|e| CliError::Config(format!("bad port {t:?}: {e}")))?;
        if p == 0 || p > ports {
            return Err(CliError::Config(format!("port {p} outside 1..={ports}")));
        }
        clicked.push(p - 1);
    }
    Ok(gbs_core::ClickPattern::new(clicked, ports)?)
}
