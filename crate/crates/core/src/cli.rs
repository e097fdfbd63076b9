//! Command line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{format_float, RunConfig};
use crate::discretize::validate_asymptotics;
use crate::error::{Error, Result};
use crate::recon::{adversarial_instance, optimality_check, prefix_len, random_instance, ReconResult};
use crate::report::{
    read_records_csv, to_json, write_recon_csv, write_records_csv, write_spectrum_csv, write_validation_csv,
};
use crate::spectrum::Count;
use crate::tract::{classify_records, q_quotient, sweep_points};

#[derive(Debug, Parser)]
#[command(
    name = "tractability",
    version,
    about = "Discretization levels and tractability of ill-posed problem families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimal discretization level k* at a single (delta, d) point.
    Kstar(RunArgs),
    /// k* and Q over a (delta, d) grid, with a tractability verdict.
    Sweep(RunArgs),
    /// Verdict for records read from a sweep CSV.
    Classify(RunArgs),
    /// Spectral cut-off errors against the order-optimal bound.
    Recon(RunArgs),
    /// Numerical singular values of the discretized integration operator.
    ValidateSvd(RunArgs),
    /// The first singular values of a spectrum.
    Spectrum(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Configuration file.
    pub config: PathBuf,
    /// Override a configuration entry, e.g. --set grid.delta=0.001.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::from_file(&self.config)?;
        for s in &self.set {
            cfg.set(s)?;
        }
        Ok(cfg)
    }
}

/// Runs a parsed command line. Tables go to the configured output file or to
/// `out`; summaries go to `out`, or to `err` when `out` carries a table.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Kstar(a) => cmd_kstar(&a.load()?, out),
        Command::Sweep(a) => cmd_sweep(&a.load()?, out, err),
        Command::Classify(a) => cmd_classify(&a.load()?, out),
        Command::Recon(a) => cmd_recon(&a.load()?, out, err),
        Command::ValidateSvd(a) => cmd_validate_svd(&a.load()?, out),
        Command::Spectrum(a) => cmd_spectrum(&a.load()?, out),
    }
}

/// Writes a table to `output.csv` when configured, else to `out`. Returns
/// whether `out` was used.
fn emit_table(cfg: &RunConfig, out: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<bool> {
    match cfg.path("output", "csv") {
        Some(p) => {
            let mut f = BufWriter::new(File::create(&p)?);
            write(&mut f)?;
            f.flush()?;
            Ok(false)
        }
        None => {
            write(out)?;
            Ok(true)
        }
    }
}

fn emit_json(cfg: &RunConfig, json: impl FnOnce() -> Result<String>) -> Result<()> {
    if let Some(p) = cfg.path("output", "json") {
        std::fs::write(p, json()?)?;
    }
    Ok(())
}

fn cmd_kstar(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let family = cfg.family()?;
    let (delta, d) = cfg.single_point()?;
    let k = family.k_star(delta, d, cfg.cap())?;
    writeln!(out, "family={family}")?;
    writeln!(out, "convention={}", family.convention())?;
    writeln!(out, "d={d}")?;
    writeln!(out, "delta={}", format_float(delta))?;
    match k.count {
        Count::Exact(n) => writeln!(out, "k_star={n}")?,
        Count::LogScale(_) => writeln!(out, "k_star=NA")?,
    }
    let l = k.ln().max(0.0);
    writeln!(out, "log_k_star={}", format_float(l))?;
    writeln!(out, "log10_k_star={}", format_float(l / std::f64::consts::LN_10))?;
    writeln!(out, "Q={}", format_float(q_quotient(&k, delta, d)))?;
    writeln!(out, "cap_hit={}", k.cap_hit)?;
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let family = cfg.family()?;
    let report = sweep_points(&family, &cfg.points()?, cfg.cap(), cfg.thresholds())?;
    let used = emit_table(cfg, out, |w| write_records_csv(&report.records, w))?;
    emit_json(cfg, || to_json(&report))?;
    let summary: &mut dyn Write = if used { err } else { out };
    writeln!(summary, "verdict={}", report.verdict)?;
    writeln!(
        summary,
        "records={} failures={}",
        report.records.len(),
        report.failures.len()
    )?;
    for s in &report.frontier_max_q {
        writeln!(
            summary,
            "shell T=[{}, {}) max_Q={}",
            s.t_lo,
            s.t_hi,
            format_float(s.max_q)
        )?;
    }
    for f in &report.failures {
        writeln!(
            summary,
            "failed d={} delta={}: {}",
            f.d,
            format_float(f.delta),
            f.message
        )?;
    }
    Ok(())
}

fn cmd_classify(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let path = cfg
        .path("classify", "records")
        .ok_or_else(|| Error::Config("missing classify.records".into()))?;
    let records = read_records_csv(File::open(&path)?)?;
    if records.is_empty() {
        return Err(Error::Config(format!("{} holds no records", path.display())));
    }
    let c = classify_records(&records, &cfg.thresholds());
    emit_json(cfg, || {
        to_json(&serde_json::json!({
            "verdict": c.verdict,
            "witness": c.witness,
            "frontier_max_q": c.frontier,
            "thresholds": cfg.thresholds(),
        }))
    })?;
    writeln!(out, "verdict={}", c.verdict)?;
    for r in &c.witness {
        writeln!(
            out,
            "witness d={} delta={} Q={}",
            r.d,
            format_float(r.delta),
            format_float(r.q)
        )?;
    }
    Ok(())
}

fn cmd_recon(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let family = cfg.family()?;
    let dims = cfg.dims()?;
    let d = match dims.as_slice() {
        [d] => *d,
        _ => return Err(Error::Config("recon needs a single dimension grid.d".into())),
    };
    let delta = match cfg.float("recon", "delta") {
        Some(x) => x,
        None => cfg
            .float("grid", "delta")
            .ok_or_else(|| Error::Config("missing recon.delta".into()))?,
    };
    let spec = family.spectrum(d)?;
    let levels = match cfg.levels() {
        Some(l) => l,
        None if delta > 0.0 => {
            let k = family.k_star(delta, d, cfg.cap())?;
            let n = k
                .exact_value()
                .ok_or_else(|| Error::Capacity(format!("k* = {k} is not enumerable")))?;
            vec![n as usize]
        }
        None => return Err(Error::Config("recon with delta = 0 needs recon.levels".into())),
    };
    let top = *levels.iter().max().unwrap();
    let mut rows: Vec<(Option<usize>, ReconResult)> = Vec::new();
    match cfg.text("recon", "mode").unwrap_or("adversarial") {
        "adversarial" => {
            for &n in &levels {
                let p = adversarial_instance(&spec, family.phi(), delta, n)?;
                rows.push((None, p.spectral_cutoff(n)?));
            }
        }
        _ => {
            let len = prefix_len(&spec, top)?;
            let s = spec.prefix(len)?;
            let support = cfg.int("recon", "support").map_or(len, |n| n as usize);
            let instances = cfg.int("recon", "instances").unwrap_or(100) as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
            for i in 0..instances {
                let p = random_instance(s.clone(), family.phi(), delta, support, &mut rng)?;
                for &n in &levels {
                    rows.push((Some(i), p.spectral_cutoff(n)?));
                }
            }
        }
    }
    let used = emit_table(cfg, out, |w| write_recon_csv(&rows, w))?;
    let summary: &mut dyn Write = if used { err } else { out };
    let worst = rows.iter().map(|(_, r)| r.ratio).fold(0.0, f64::max);
    writeln!(
        summary,
        "seed={} rows={} max_ratio={}",
        cfg.seed(),
        rows.len(),
        format_float(worst)
    )?;
    if delta > 0.0 {
        let c = optimality_check(&family, delta, d, cfg.cap())?;
        writeln!(
            summary,
            "k_star={} error_at_kstar={} two_phi_bound={} rate_bound={} holds={}",
            c.k_star,
            format_float(c.error_at_kstar),
            format_float(c.two_phi_bound),
            format_float(c.rate_bound),
            c.holds()
        )?;
    }
    Ok(())
}

fn cmd_validate_svd(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let d = cfg.int("svd", "d").unwrap_or(1);
    let n_grid = cfg
        .int("svd", "n_grid")
        .ok_or_else(|| Error::Config("missing svd.n_grid".into()))?;
    let j_max = cfg.int("svd", "j_max").unwrap_or(10);
    let d = u32::try_from(d).map_err(|_| Error::Config(format!("svd.d = {d} out of range")))?;
    let rows = validate_asymptotics(d, n_grid as usize, j_max as usize)?;
    emit_table(cfg, out, |w| write_validation_csv(&rows, w))?;
    Ok(())
}

fn cmd_spectrum(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let count = cfg.int("spectrum", "count").unwrap_or(10) as usize;
    let d = match cfg.dims()?.as_slice() {
        [d] => *d,
        _ => return Err(Error::Config("spectrum needs a single dimension grid.d".into())),
    };
    let spec = cfg
        .spectrum_model()?
        .at(d)?
        .with_materialize_limit(cfg.materialize_limit());
    let values = spec.prefix(count)?;
    emit_table(cfg, out, |w| write_spectrum_csv(&values, w))?;
    Ok(())
}
