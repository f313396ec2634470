//! Timing of the Monte-Carlo loop.
//!
//! Only `generate` calls are timed. Construction (variance tables, FFT plans)
//! happens before, and anything done with the screens afterwards (writing to
//! disk, say) happens outside the timed region.

use std::hint::black_box;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::ScreenGenerator;
use crate::grid::ComplexScreen;
use crate::rng::SampleSeed;
use crate::spectrum::IsotropicSpectrum;

pub const DEFAULT_WARMUP: u64 = 10;

/// Smallest accepted sample count.
pub const MIN_SAMPLES: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub method: String,
    /// Grid side `M` (points along `x`).
    pub grid_side: usize,
    pub n_components: Option<usize>,
    pub n_sh: Option<u32>,
    /// Real screens produced, two per complex sample.
    pub n_screens: u64,
    pub total_seconds: f64,
    /// Sum of the individually timed iterations (sequential runs only).
    pub iteration_seconds: f64,
    pub time_per_screen: f64,
    pub host: String,
    pub parallel: bool,
}

impl TimingReport {
    pub const CSV_HEADER: &'static str = "method,M,n_components,n_sh,n_screens,time_per_screen_s,host";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{:e},{}",
            self.method,
            self.grid_side,
            opt(self.n_components.map(|n| n.to_string())),
            opt(self.n_sh.map(|n| n.to_string())),
            self.n_screens,
            self.time_per_screen,
            self.host
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub method: String,
    pub n_components: Option<usize>,
    pub n_sh: Option<u32>,
    /// Complex samples, i.e. half the real screens.
    pub n_samples: u64,
    pub warmup: u64,
    pub master_seed: u64,
    pub parallel: bool,
}

/// `arch-os-Ncpu`, enough to tell machines apart in a results table.
pub fn host_descriptor() -> String {
    let cpus = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{}-{}-{}cpu", std::env::consts::ARCH, std::env::consts::OS, cpus)
}

/// Receives each finished screen outside the timed region.
pub type ScreenSink<'a> = &'a mut dyn FnMut(&ComplexScreen) -> Result<()>;

/// Times `n_samples` generations after `warmup` untimed ones. Each finished
/// screen is handed to `sink` outside the timed region.
pub fn time_generator<G: ScreenGenerator + ?Sized>(
    generator: &G,
    opts: &BenchOptions,
    mut sink: Option<ScreenSink<'_>>,
) -> Result<TimingReport> {
    if opts.n_samples < MIN_SAMPLES {
        return Err(Error::argument(format!("need at least {MIN_SAMPLES} samples, got {}", opts.n_samples)));
    }
    for i in 0..opts.warmup {
        black_box(generator.generate(SampleSeed::new(opts.master_seed ^ 0x5eed, i)));
    }
    let (total, iterations) = if opts.parallel {
        if sink.is_some() {
            return Err(Error::argument("screen persistence is not supported in parallel timing"));
        }
        let start = Instant::now();
        (0..opts.n_samples).into_par_iter().for_each(|i| {
            black_box(generator.generate(SampleSeed::new(opts.master_seed, i)));
        });
        (start.elapsed().as_secs_f64(), f64::NAN)
    } else {
        let mut timed = 0.0;
        let mut outside = 0.0;
        let loop_start = Instant::now();
        for i in 0..opts.n_samples {
            let start = Instant::now();
            let screen = black_box(generator.generate(SampleSeed::new(opts.master_seed, i)));
            timed += start.elapsed().as_secs_f64();
            if let Some(f) = sink.as_mut() {
                let io_start = Instant::now();
                f(&screen)?;
                outside += io_start.elapsed().as_secs_f64();
            }
        }
        (loop_start.elapsed().as_secs_f64() - outside, timed)
    };
    let n_screens = 2 * opts.n_samples;
    Ok(TimingReport {
        method: opts.method.clone(),
        grid_side: generator.grid().nx,
        n_components: opts.n_components,
        n_sh: opts.n_sh,
        n_screens,
        total_seconds: total,
        iteration_seconds: iterations,
        time_per_screen: total / n_screens as f64,
        host: host_descriptor(),
        parallel: opts.parallel,
    })
}

/// A spectrum with the values of `base` at `multiplier` times the cost.
#[derive(Debug, Clone)]
pub struct ExpensiveSpectrum<S> {
    base: S,
    multiplier: u32,
}

impl<S: IsotropicSpectrum> ExpensiveSpectrum<S> {
    pub fn new(base: S, multiplier: u32) -> Result<Self> {
        if multiplier == 0 {
            return Err(Error::argument("cost multiplier must be at least 1"));
        }
        Ok(ExpensiveSpectrum { base, multiplier })
    }
}

impl<S: IsotropicSpectrum> IsotropicSpectrum for ExpensiveSpectrum<S> {
    fn density(&self, k: f64) -> f64 {
        for _ in 1..self.multiplier {
            black_box(self.base.density(black_box(k)));
        }
        self.base.density(k)
    }

    fn support_max(&self) -> f64 {
        self.base.support_max()
    }

    fn scales(&self) -> Vec<f64> {
        self.base.scales()
    }

    fn singular_at_origin(&self) -> bool {
        self.base.singular_at_origin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{DftGenerator, ShConfig};
    use crate::grid::GridSpec;
    use crate::spectrum::{SpectrumParams, VonKarman};

    fn vk() -> VonKarman {
        VonKarman::new(SpectrumParams::reference()).unwrap()
    }

    fn opts(n: u64) -> BenchOptions {
        BenchOptions {
            method: "dft".into(),
            n_components: None,
            n_sh: Some(0),
            n_samples: n,
            warmup: 2,
            master_seed: 1,
            parallel: false,
        }
    }

    #[test]
    fn expensive_spectrum_keeps_values() {
        let base = vk();
        let pricey = ExpensiveSpectrum::new(vk(), 7).unwrap();
        let one = ExpensiveSpectrum::new(vk(), 1).unwrap();
        for i in 0..100 {
            let k = 0.01 * 1.15f64.powi(i);
            assert_eq!(pricey.density(k).to_bits(), base.density(k).to_bits());
            assert_eq!(one.density(k).to_bits(), base.density(k).to_bits());
        }
        assert!(ExpensiveSpectrum::new(vk(), 0).is_err());
    }

    #[test]
    fn report_is_consistent() {
        let g = DftGenerator::new(GridSpec::square(16, 1.0).unwrap(), vk(), ShConfig::default()).unwrap();
        let mut seen = Vec::new();
        let mut sink = |s: &ComplexScreen| {
            seen.push(s.sample_index);
            Ok(())
        };
        let r = time_generator(&g, &opts(100), Some(&mut sink)).unwrap();
        assert_eq!(seen, (0..100).collect::<Vec<_>>());
        assert_eq!(r.n_screens, 200);
        assert!(r.time_per_screen > 0.0);
        assert!(r.iteration_seconds <= r.total_seconds);
        assert!(r.iteration_seconds > 0.5 * r.total_seconds, "{} vs {}", r.iteration_seconds, r.total_seconds);
        let row = r.csv_row();
        assert_eq!(row.split(',').count(), TimingReport::CSV_HEADER.split(',').count());
        assert!(row.starts_with("dft,16,,0,200,"));
        assert!(time_generator(&g, &opts(10), None).is_err());
    }
}
