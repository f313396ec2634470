use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use phasescreen::bench::{time_generator, BenchOptions, ExpensiveSpectrum, TimingReport};
use phasescreen::dft::DftGenerator;
use phasescreen::io::write_complex;
use phasescreen::spectrum::target_structure_function;
use phasescreen::stats::{monte_carlo, SeparationAxis, SfAccumulator};
use phasescreen::{GridSpec, Method, SampleSeed, ScreenGenerator, VonKarman};
use rayon::prelude::*;

use crate::config::{CampaignConfig, Reference};
use crate::error::CliError;

/// Screens generated in parallel before each ordered write.
const WRITE_BATCH: u64 = 32;

fn spectrum(cfg: &CampaignConfig) -> Result<VonKarman, CliError> {
    Ok(VonKarman::new(cfg.params)?)
}

/// Writes a report to `out`, or to stdout.
pub fn write_report(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Writes `2·n_samples` real screens to `out`. Nothing is created when
/// `n_samples` is zero.
pub fn generate(cfg: &CampaignConfig, out: Option<&Path>) -> Result<(), CliError> {
    let out = out.ok_or_else(|| CliError::Usage("generate needs --out <path>".into()))?;
    let generator = cfg.method.build(cfg.grid, spectrum(cfg)?)?;
    if cfg.n_samples == 0 {
        return Ok(());
    }
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", out.display()));
    let mut w = BufWriter::new(File::create(out).map_err(io_err)?);
    let mut start = 0;
    while start < cfg.n_samples {
        let end = (start + WRITE_BATCH).min(cfg.n_samples);
        let screens: Vec<_> =
            (start..end).into_par_iter().map(|i| generator.generate(SampleSeed::new(cfg.seed, i))).collect();
        for s in &screens {
            write_complex(&mut w, s)?;
        }
        start = end;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

fn reference_curve(cfg: &CampaignConfig, acc: &SfAccumulator) -> Result<Vec<f64>, CliError> {
    match (cfg.reference, &cfg.method) {
        (Reference::DftAnalytic, Method::Dft(sh)) => {
            let g = DftGenerator::new(cfg.grid, spectrum(cfg)?, *sh)?;
            let pairs: Vec<(i64, i64)> = cfg
                .offsets
                .iter()
                .map(|&d| match cfg.axis {
                    SeparationAxis::X => (d as i64, 0),
                    SeparationAxis::Diagonal => (d as i64, d as i64),
                })
                .collect();
            Ok(g.analytic_structure_function(&pairs))
        }
        _ => {
            let spec = spectrum(cfg)?;
            acc.separations().iter().map(|&r| Ok(target_structure_function(r, &spec)?)).collect()
        }
    }
}

/// Estimates the structure function from `n_samples` complex samples and
/// compares it with the reference curve. Returns the CSV report and σ.
pub fn validate(cfg: &CampaignConfig) -> Result<(String, f64), CliError> {
    if cfg.n_samples < 1 {
        return Err(CliError::Usage("validate needs n_samples >= 1".into()));
    }
    let generator = cfg.method.build(cfg.grid, spectrum(cfg)?)?;
    let template = SfAccumulator::new(cfg.grid, cfg.axis, &cfg.offsets)?;
    let acc = monte_carlo(&*generator, cfg.seed, 0..cfg.n_samples, &template)?;
    let estimate = acc.estimate();
    let kurtosis = acc.normalized_variance()?;
    let reference = reference_curve(cfg, &acc)?;
    let sigma = estimate.rms_relative_difference(&reference)?;
    let mut csv = cfg.echo();
    csv.push_str("r_m,D_est_rad2,D_target_rad2,pair_count,sigma_D2\n");
    for i in 0..estimate.values.len() {
        writeln!(
            csv,
            "{},{},{},{},{}",
            estimate.separations[i], estimate.values[i], reference[i], estimate.pair_counts[i], kurtosis[i]
        )
        .unwrap();
    }
    Ok((csv, sigma))
}

/// The reference structure function at `r = 0` and every configured separation.
pub fn target(cfg: &CampaignConfig) -> Result<String, CliError> {
    let spec = spectrum(cfg)?;
    let template = SfAccumulator::new(cfg.grid, cfg.axis, &cfg.offsets)?;
    let mut csv = cfg.echo();
    csv.push_str("r_m,D_target_rad2\n");
    for r in std::iter::once(0.0).chain(template.separations()) {
        writeln!(csv, "{r},{}", target_structure_function(r, &spec)?).unwrap();
    }
    Ok(csv)
}

/// Times every (method, size) cell of the bench matrix.
pub fn bench(cfg: &CampaignConfig) -> Result<String, CliError> {
    let mut csv = cfg.echo();
    csv.push_str(TimingReport::CSV_HEADER);
    csv.push('\n');
    for id in &cfg.bench.methods {
        let method = cfg.method_named(id)?;
        for &m in &cfg.bench.sizes {
            let ny = if cfg.grid.ny == 1 { 1 } else { m };
            let grid = GridSpec::new(m, ny, cfg.grid.side)?;
            let spec = ExpensiveSpectrum::new(spectrum(cfg)?, cfg.bench.spectrum_cost)?;
            let generator = method.build(grid, spec)?;
            let opts = BenchOptions {
                method: id.clone(),
                n_components: method.n_components(),
                n_sh: method.n_sh(),
                n_samples: cfg.n_samples,
                warmup: cfg.bench.warmup,
                master_seed: cfg.seed,
                parallel: cfg.bench.parallel,
            };
            let report = time_generator(&*generator, &opts, None)?;
            csv.push_str(&report.csv_row());
            csv.push('\n');
        }
    }
    Ok(csv)
}
