//! Sample dump files.
//!
//! ```text
//! # config_sha256=<hex> seed=<seed> n_samples=<n>
//! 0,1,0
//! 2,0,0
//! ```

use std::io::{BufRead, Write};

use gbs_core::sampler::VirtualSampler;
use gbs_core::{GbsModel, OutputPattern, Truncation};
use rayon::prelude::*;

use crate::{CliError, CliResult};

/// Blocks generated per parallel batch; bounds memory for large dumps.
const BATCH_BLOCKS: u64 = 64;

/// Summary statistics of a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct DumpSummary {
    pub n_samples: u64,
    pub photons: u64,
    pub port_photons: Vec<u64>,
    pub cutoff: u32,
}

impl DumpSummary {
    /// Mean sampled photons per virtual mode.
    pub fn mean_photons_per_mode(&self, inputs: usize) -> f64 {
        self.photons as f64 / (self.n_samples as f64 * inputs as f64)
    }
}

/// Draws `n_samples` patterns and writes them in the dump format.
pub fn write_samples(
    out: &mut impl Write,
    model: &GbsModel,
    truncation: Truncation,
    config_hash: &str,
    seed: u64,
    n_samples: u64,
) -> CliResult<DumpSummary> {
    let sampler = VirtualSampler::new(model, truncation)?;
    writeln!(out, "# config_sha256={config_hash} seed={seed} n_samples={n_samples}")?;
    let mut summary = DumpSummary {
        n_samples,
        photons: 0,
        port_photons: vec![0; model.ports()],
        cutoff: sampler.cutoff(),
    };
    let blocks = VirtualSampler::block_count(n_samples);
    let mut start = 0;
    while start < blocks {
        let end = (start + BATCH_BLOCKS).min(blocks);
        let texts: Vec<(String, Vec<u64>)> = (start..end)
            .into_par_iter()
            .map(|b| {
                let mut text = String::new();
                let mut ports = vec![0u64; sampler.ports()];
                sampler.run_block(seed, n_samples, b, |c| {
                    for (i, &x) in c.iter().enumerate() {
                        if i > 0 {
                            text.push(',');
                        }
                        text.push_str(&x.to_string());
                        ports[i] += x as u64;
                    }
                    text.push('\n');
                });
                (text, ports)
            })
            .collect();
        for (text, ports) in texts {
            out.write_all(text.as_bytes())?;
            for (acc, p) in summary.port_photons.iter_mut().zip(ports) {
                *acc += p;
            }
        }
        start = end;
    }
    summary.photons = summary.port_photons.iter().sum();
    out.flush()?;
    Ok(summary)
}

/// Header fields of a dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpHeader {
    pub config_hash: String,
    pub seed: u64,
    pub n_samples: u64,
}

/// Reads a dump back.
pub fn read_samples(input: impl BufRead) -> CliResult<(DumpHeader, Vec<OutputPattern>)> {
    let bad = |msg: String| CliError::Failed(format!("malformed sample dump: {msg}"));
    let mut lines = input.lines();
    let head = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let mut hash = None;
    let mut seed = None;
    let mut n = None;
    for field in head.trim_start_matches('#').split_whitespace() {
        match field.split_once('=') {
            Some(("config_sha256", v)) => hash = Some(v.to_string()),
            Some(("seed", v)) => seed = v.parse().ok(),
            Some(("n_samples", v)) => n = v.parse().ok(),
            _ => return Err(bad(format!("unknown header field {field:?}"))),
        }
    }
    let header = DumpHeader {
        config_hash: hash.ok_or_else(|| bad("missing config_sha256".into()))?,
        seed: seed.ok_or_else(|| bad("missing seed".into()))?,
        n_samples: n.ok_or_else(|| bad("missing n_samples".into()))?,
    };
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        let counts = line
            .split(',')
            .map(|t| t.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", rows.len() + 1)))?;
        rows.push(OutputPattern::new(counts));
    }
    if rows.len() as u64 != header.n_samples {
        return Err(bad(format!("{} rows, header says {}", rows.len(), header.n_samples)));
    }
    Ok((header, rows))
}
