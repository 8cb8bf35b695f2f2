use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gbs::dump::write_samples;
use gbs::oracle::{oracle_check, ORACLE_TOL};
use gbs::parallel::{self, with_threads};
use gbs::sweep::{run_sweep, summarize, write_csv};
use gbs::{fmt_f64, parse_clicks, parse_pattern, CliError, CliResult, Experiment, SweepGrid};
use gbs_core::fock::FockGuard;
use gbs_core::sampler::samples_for_epsilon;
use gbs_core::Truncation;

/// Gaussian boson sampling with partially distinguishable photons.
#[derive(Parser)]
#[command(name = "gbs", version)]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed (Haar unitary and sampler streams).
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config indistinguishability efficiency.
    #[arg(long)]
    eta_ind: Option<f64>,
}

impl ExperimentArgs {
    fn load(&self) -> CliResult<Experiment> {
        let mut exp = Experiment::load(&self.config)?;
        if let Some(seed) = self.seed {
            exp = exp.with_seed(seed)?;
        }
        if let Some(eta) = self.eta_ind {
            exp = exp.with_eta_ind(eta)?;
        }
        Ok(exp)
    }
}

#[derive(Args)]
struct SamplerArgs {
    /// Target accuracy of the sampled distribution; sets ceil(1/epsilon) samples.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Explicit sample count.
    #[arg(long)]
    samples: Option<u64>,
    /// Truncate virtual-mode photon numbers at ceil(t * mean) instead of
    /// the automatic tail-controlled cutoff.
    #[arg(long)]
    trunc_factor: Option<f64>,
}

impl SamplerArgs {
    fn truncation(&self) -> CliResult<Truncation> {
        match self.trunc_factor {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(CliError::Config(format!("--trunc-factor {t} must be positive"))),
            Some(t) => Ok(Truncation::Factor(t)),
            None => Ok(Truncation::Auto),
        }
    }

    /// `(epsilon, samples)`, with one derived from the other.
    fn budget(&self, default_epsilon: Option<f64>) -> CliResult<(f64, u64)> {
        match (self.epsilon.or(default_epsilon), self.samples) {
            (Some(e), Some(n)) => Ok((e, n)),
            (Some(e), None) => Ok((e, samples_for_epsilon(e)?)),
            (None, Some(n)) if n > 0 => Ok((1.0 / n as f64, n)),
            _ => Err(CliError::Config("give --epsilon or --samples".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Probability of a photon-number pattern, exact or truncated at --ncut.
    ProbPnr {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Photon counts per port, e.g. 1,0,2.
        #[arg(long)]
        pattern: String,
        /// Keep at most this many indistinguishable photons, with sampled
        /// distinguishable probabilities.
        #[arg(long)]
        ncut: Option<u32>,
        #[command(flatten)]
        sampler: SamplerArgs,
    },
    /// Probability of clicks on exactly the given ports.
    ProbThreshold {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Clicked ports, 1-based, e.g. 1,3 (empty for no clicks).
        #[arg(long, default_value = "")]
        clicks: String,
        /// Fully indistinguishable Torontonian formula.
        #[arg(long)]
        ideal: bool,
    },
    /// Draws distinguishable-photon patterns into a sample dump.
    Sample {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fidelity of the truncated approximation over a grid.
    FidelitySweep {
        /// Sweep grid (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Records CSV.
        #[arg(long)]
        out: PathBuf,
        /// Measure runtime_ms (left empty otherwise, keeping output reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Compares the engine with the Fock-space oracle.
    OracleCheck {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Fock cutoff (automatic by default).
        #[arg(long)]
        cutoff: Option<u32>,
        #[arg(long, default_value_t = FockGuard::default().max_ports)]
        max_ports: usize,
        #[arg(long, default_value_t = FockGuard::default().max_inputs)]
        max_inputs: usize,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let threads = cli.threads;
    with_threads(threads, move || dispatch(cli.command, threads))?
}

fn dispatch(command: Command, threads: Option<usize>) -> CliResult<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let effective = rayon::current_num_threads();
    match command {
        Command::ProbPnr { exp, pattern, ncut, sampler } => {
            let e = exp.load()?;
            let model = e.model()?;
            let s = parse_pattern(&pattern, model.ports())?;
            let start = Instant::now();
            writeln!(out, "pattern,N_cut,epsilon,samples,probability")?;
            match ncut {
                None => {
                    let p = parallel::prob_total_exact_par(&model, &s)?;
                    writeln!(out, "\"{s}\",,,,{}", fmt_f64(p))?;
                }
                Some(n_cut) => {
                    if n_cut > s.total() {
                        return Err(CliError::Config(format!("--ncut {n_cut} exceeds N = {}", s.total())));
                    }
                    let (eps, n) = sampler.budget(None)?;
                    let dist = parallel::estimate_p_sim_par(&model, sampler.truncation()?, eps, e.config.seed, Some(n), Some(&s))?;
                    let terms = parallel::indistinguishable_terms_par(&model, &s, n_cut)?;
                    let p: f64 = terms.order_terms(&dist).iter().sum();
                    writeln!(out, "\"{s}\",{n_cut},{},{n},{}", fmt_f64(eps), fmt_f64(p))?;
                }
            }
            log::info!("prob-pnr took {:.3} ms on {effective} threads", start.elapsed().as_secs_f64() * 1e3);
        }
        Command::ProbThreshold { exp, clicks, ideal } => {
            let e = exp.load()?;
            let model = e.model()?;
            let u = parse_clicks(&clicks, model.ports())?;
            let start = Instant::now();
            let p = if ideal {
                model.prob_threshold_ideal(&u)?
            } else {
                parallel::prob_threshold_par(&model, &u)?
            };
            let ports: Vec<String> = u.ports().iter().map(|p| (p + 1).to_string()).collect();
            writeln!(out, "clicks,method,probability")?;
            writeln!(
                out,
                "\"{}\",{},{}",
                ports.join(","),
                if ideal { "ideal" } else { "partial" },
                fmt_f64(p)
            )?;
            log::info!("prob-threshold took {:.3} ms on {effective} threads", start.elapsed().as_secs_f64() * 1e3);
        }
        Command::Sample { exp, sampler, out: path } => {
            let e = exp.load()?;
            let model = e.model()?;
            let (_, n) = sampler.budget(None)?;
            let mut file = BufWriter::new(File::create(&path)?);
            let summary = write_samples(&mut file, &model, sampler.truncation()?, &e.file.hash(), e.config.seed, n)?;
            file.into_inner().map_err(|e| e.into_error())?.sync_all()?;
            let inputs = model.inputs();
            writeln!(out, "n_samples,cutoff,mean_photons_per_mode,alpha_d")?;
            writeln!(
                out,
                "{n},{},{},{}",
                summary.cutoff,
                fmt_f64(summary.mean_photons_per_mode(inputs)),
                fmt_f64(model.coefficients().alpha_d)
            )?;
            let means: Vec<String> = summary
                .port_photons
                .iter()
                .map(|&p| fmt_f64(p as f64 / n as f64))
                .collect();
            writeln!(out, "# mean photons per output port: {}", means.join(","))?;
        }
        Command::FidelitySweep { config, out: path, timing } => {
            let grid = SweepGrid::load(&config)?;
            let start = Instant::now();
            let records = run_sweep(&grid, timing)?;
            let mut file = BufWriter::new(File::create(&path)?);
            write_csv(&mut file, &records)?;
            file.flush()?;
            if timing {
                writeln!(
                    out,
                    "# threads={} wall_ms={}",
                    threads.filter(|&t| t > 0).unwrap_or(effective),
                    fmt_f64(start.elapsed().as_secs_f64() * 1e3)
                )?;
            }
            summarize(&records)?.write_report(&mut out)?;
        }
        Command::OracleCheck { exp, cutoff, max_ports, max_inputs } => {
            let e = exp.load()?;
            let guard = FockGuard { max_ports, max_inputs };
            let rep = oracle_check(&e, cutoff, guard)?;
            let verdict = |err: f64| if err <= ORACLE_TOL { "PASS" } else { "FAIL" };
            writeln!(out, "fock cutoff {} (truncated mass {})", rep.cutoff, fmt_f64(rep.tail))?;
            writeln!(
                out,
                "{} pnr: {} patterns, max |difference| {}",
                verdict(rep.pnr_max_error),
                rep.pnr_patterns,
                fmt_f64(rep.pnr_max_error)
            )?;
            writeln!(
                out,
                "{} threshold: {} click patterns, max |difference| {}",
                verdict(rep.threshold_max_error),
                rep.click_patterns,
                fmt_f64(rep.threshold_max_error)
            )?;
            if !rep.passed() {
                return Err(CliError::Failed(format!("oracle mismatch above {ORACLE_TOL:e}")));
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GBS_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
