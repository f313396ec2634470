//! Randomized-DFT (PWD) screens.
//!
//! Each sample draws one global shift `(ξ, η) ~ U(−½, ½)²` and samples the
//! spectrum at `(Δk(m + ξ), Δk(n + η))`:
//!
//! ```text
//! ψ(j, l) = Σ a_{m,n} exp(2πi((m + ξ)j + (n + η)l)/N)
//!         = exp(2πi(ξj + ηl)/N) · Σ a_{m,n} exp(2πi(mj + nl)/N)
//! ```
//!
//! so an FFT followed by a phase ramp evaluates it. With subharmonics the main
//! series drops its centre cell, each level-`p` neighbour cell gets its own
//! random offset, and one extra term covers the centre cell of the deepest
//! level. The cells then tile the plane exactly.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::dft::{inverse_fft2, signed_frequency};
use crate::error::Result;
use crate::generator::ScreenGenerator;
use crate::grid::{ComplexScreen, GridSpec};
use crate::rng::{Component, SampleRng, SampleSeed};
use crate::spectrum::IsotropicSpectrum;
use crate::waves::plane_wave_grid;

/// Redraws allowed when a shift lands exactly on a singular origin.
const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwdConfig {
    pub grid: GridSpec,
    pub n_sh: u32,
}

/// One randomized subharmonic term of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwdSubharmonic {
    pub p: f64,
    pub q: f64,
    pub amplitude: Complex64,
}

pub struct PwdGenerator<S> {
    cfg: PwdConfig,
    spectrum: S,
    fft: Arc<dyn Fft<f64>>,
    /// `(2πj/N)` ramp factors reused for both axes.
    ramp_base: Vec<f64>,
}

impl<S: IsotropicSpectrum> PwdGenerator<S> {
    pub fn new(cfg: PwdConfig, spectrum: S) -> Result<Self> {
        cfg.grid.require_fft_layout()?;
        let n = cfg.grid.nx;
        let fft = FftPlanner::new().plan_fft_inverse(n);
        let ramp_base = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        Ok(PwdGenerator { cfg, spectrum, fft, ramp_base })
    }

    pub fn config(&self) -> &PwdConfig {
        &self.cfg
    }

    /// Draws the global shift of sample `seed`.
    pub fn shift(&self, seed: SampleSeed) -> (f64, f64) {
        let mut rng = seed.stream(Component::Shift);
        let mut draw = || (rng.uniform_in(-0.5, 0.5), rng.uniform_in(-0.5, 0.5));
        let mut shift = draw();
        // Only the kept centre term can hit k = 0.
        if self.cfg.n_sh == 0 && self.spectrum.singular_at_origin() {
            let mut tries = 0;
            while shift == (0.0, 0.0) && tries < MAX_REDRAWS {
                shift = draw();
                tries += 1;
            }
        }
        shift
    }

    /// Main-series amplitudes in FFT bin order for a given shift.
    pub fn main_amplitudes(&self, seed: SampleSeed, (xi, eta): (f64, f64)) -> Array2<Complex64> {
        let n = self.cfg.grid.nx;
        let dk = self.cfg.grid.dk();
        let drop_centre = self.cfg.n_sh > 0;
        let mut rng = seed.stream(Component::Dft);
        Array2::from_shape_fn((n, n), |(nb, mb)| {
            let z = rng.complex_normal();
            let (m, k) = (signed_frequency(mb, n), signed_frequency(nb, n));
            if drop_centre && m == 0 && k == 0 {
                return Complex64::new(0.0, 0.0);
            }
            let phi = self.spectrum.density_xy(dk * (m as f64 + xi), dk * (k as f64 + eta));
            z * (dk * phi.sqrt())
        })
    }

    /// Subharmonic terms of sample `seed`: `8·N_SH` neighbour cells, then the
    /// centre cell of the deepest level.
    pub fn subharmonic_terms(&self, seed: SampleSeed) -> Vec<PwdSubharmonic> {
        if self.cfg.n_sh == 0 {
            return Vec::new();
        }
        let dk = self.cfg.grid.dk();
        let mut rng = seed.stream(Component::Subharmonic);
        let mut terms = Vec::with_capacity(8 * self.cfg.n_sh as usize + 1);
        for level in 1..=self.cfg.n_sh {
            let dkp = dk / 3f64.powi(level as i32);
            for n in -1i32..=1 {
                for m in -1i32..=1 {
                    if m == 0 && n == 0 {
                        continue;
                    }
                    terms.push(self.cell_term(&mut rng, dkp, m as f64, n as f64));
                }
            }
        }
        let deepest = dk / 3f64.powi(self.cfg.n_sh as i32);
        let mut centre = self.cell_term(&mut rng, deepest, 0.0, 0.0);
        let mut tries = 0;
        while !centre.amplitude.is_finite() && tries < MAX_REDRAWS {
            centre = self.cell_term(&mut rng, deepest, 0.0, 0.0);
            tries += 1;
        }
        terms.push(centre);
        terms
    }

    fn cell_term(&self, rng: &mut SampleRng, side: f64, m: f64, n: f64) -> PwdSubharmonic {
        let xi = rng.uniform_in(-0.5, 0.5);
        let eta = rng.uniform_in(-0.5, 0.5);
        let z = rng.complex_normal();
        let (p, q) = (side * (m + xi), side * (n + eta));
        let amplitude = z * (side * self.spectrum.density_xy(p, q).sqrt());
        PwdSubharmonic { p, q, amplitude }
    }

    /// Generates a sample with the global shift overridden.
    pub fn generate_with_shift(&self, seed: SampleSeed, shift: (f64, f64)) -> ComplexScreen {
        let grid = self.cfg.grid;
        let n = grid.nx;
        let mut values = self.main_amplitudes(seed, shift);
        inverse_fft2(&mut values, self.fft.as_ref());
        let ramp_x: Vec<Complex64> = self.ramp_base.iter().map(|&t| Complex64::cis(shift.0 * t)).collect();
        let ramp_y: Vec<Complex64> = self.ramp_base.iter().map(|&t| Complex64::cis(shift.1 * t)).collect();
        for ((l, j), v) in values.indexed_iter_mut() {
            *v *= ramp_x[j] * ramp_y[l];
        }
        debug_assert_eq!(values.dim(), (n, n));
        let terms = self.subharmonic_terms(seed);
        if !terms.is_empty() {
            let p: Vec<f64> = terms.iter().map(|t| t.p).collect();
            let q: Vec<f64> = terms.iter().map(|t| t.q).collect();
            let a: Vec<Complex64> = terms.iter().map(|t| t.amplitude).collect();
            values += &plane_wave_grid(&p, &q, &a, &grid);
        }
        ComplexScreen { grid, values, sample_index: seed.index }
    }
}

impl<S: IsotropicSpectrum> ScreenGenerator for PwdGenerator<S> {
    fn grid(&self) -> GridSpec {
        self.cfg.grid
    }

    fn generate(&self, seed: SampleSeed) -> ComplexScreen {
        self.generate_with_shift(seed, self.shift(seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{dft_direct_sum, DftGenerator, ShConfig};
    use crate::spectrum::{SpectrumParams, VonKarman};
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Counting<S> {
        inner: S,
        calls: AtomicUsize,
    }

    impl<S: IsotropicSpectrum> IsotropicSpectrum for Counting<S> {
        fn density(&self, k: f64) -> f64 {
            self.calls.fetch_add(1, Ordering::Relaxed);
            self.inner.density(k)
        }
        fn support_max(&self) -> f64 {
            self.inner.support_max()
        }
    }

    fn vk() -> VonKarman {
        VonKarman::new(SpectrumParams::reference()).unwrap()
    }

    fn pwd(n: usize, n_sh: u32) -> PwdGenerator<VonKarman> {
        PwdGenerator::new(PwdConfig { grid: GridSpec::square(n, 1.0).unwrap(), n_sh }, vk()).unwrap()
    }

    fn max_norm(a: &Array2<Complex64>) -> f64 {
        a.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn fft_and_ramp_match_direct_shifted_sum() {
        let g = pwd(8, 0);
        for index in 0..4 {
            let seed = SampleSeed::new(21, index);
            let (xi, eta) = g.shift(seed);
            let bins = g.main_amplitudes(seed, (xi, eta));
            let fast = g.generate(seed).values;
            let slow = Array2::from_shape_fn((8, 8), |(l, j)| {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((nb, mb), &a) in bins.indexed_iter() {
                    let m = signed_frequency(mb, 8) as f64 + xi;
                    let n = signed_frequency(nb, 8) as f64 + eta;
                    acc += a * Complex64::cis(2.0 * PI * (m * j as f64 + n * l as f64) / 8.0);
                }
                acc
            });
            assert!(max_norm(&(&fast - &slow)) <= 1e-12 * max_norm(&slow));
        }
    }

    #[test]
    fn zero_shift_is_dft_plus_centre_term() {
        let grid = GridSpec::square(8, 1.0).unwrap();
        let p = pwd(8, 0);
        let d = DftGenerator::new(grid, vk(), ShConfig::default()).unwrap();
        let seed = SampleSeed::new(2, 3);
        let bins = p.main_amplitudes(seed, (0.0, 0.0));
        // Same stream and same spectrum samples; only the centre differs.
        let mut expected = d.dft_amplitudes(seed);
        expected[[0, 0]] = bins[[0, 0]];
        let diff = (&bins - &expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff <= 1e-15 * max_norm(&bins));
        assert!(bins[[0, 0]].norm() > 0.0);
        let screen = p.generate_with_shift(seed, (0.0, 0.0)).values;
        let direct = dft_direct_sum(&bins);
        assert!(max_norm(&(&screen - &direct)) <= 1e-12 * max_norm(&direct));
    }

    #[test]
    fn spectrum_calls_per_sample() {
        let grid = GridSpec::square(16, 1.0).unwrap();
        for n_sh in [0u32, 1, 3] {
            let spec = Counting { inner: vk(), calls: AtomicUsize::new(0) };
            let g = PwdGenerator::new(PwdConfig { grid, n_sh }, &spec).unwrap();
            spec.calls.store(0, Ordering::Relaxed);
            g.generate(SampleSeed::new(1, 0));
            let expected = if n_sh == 0 { 256 } else { 256 - 1 + 8 * n_sh as usize + 1 };
            assert_eq!(spec.calls.load(Ordering::Relaxed), expected, "n_sh = {n_sh}");
        }
    }

    #[test]
    fn subharmonic_wave_vectors_stay_near_origin() {
        let g = pwd(16, 4);
        let dk = 2.0 * PI;
        for index in 0..50 {
            let terms = g.subharmonic_terms(SampleSeed::new(4, index));
            assert_eq!(terms.len(), 33);
            for t in &terms {
                assert!(t.p.abs() < 1.5 * dk / 3.0 && t.q.abs() < 1.5 * dk / 3.0);
                assert!(t.amplitude.is_finite());
            }
            let centre = terms.last().unwrap();
            assert!(centre.p.abs() <= 0.5 * dk / 81.0 && centre.q.abs() <= 0.5 * dk / 81.0);
        }
    }

    #[test]
    fn no_subharmonics_means_plain_pwd() {
        let g = pwd(8, 0);
        assert!(g.subharmonic_terms(SampleSeed::new(0, 0)).is_empty());
        let bins = g.main_amplitudes(SampleSeed::new(0, 0), (0.1, -0.2));
        assert!(bins[[0, 0]].norm() > 0.0);
        let with_sh = pwd(8, 1);
        assert_eq!(with_sh.main_amplitudes(SampleSeed::new(0, 0), (0.1, -0.2))[[0, 0]], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn conditionally_gaussian() {
        // Fixed shift: Re ψ at one point is a sum of Gaussians, kurtosis 3.
        let g = pwd(16, 0);
        let shift = (0.3, -0.1);
        let draws: Vec<f64> =
            (0..10_000).map(|i| g.generate_with_shift(SampleSeed::new(6, i), shift).values[[3, 5]].re).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        let m2 = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / draws.len() as f64;
        let m4 = draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / draws.len() as f64;
        let kurtosis = m4 / (m2 * m2);
        assert!((kurtosis - 3.0).abs() < 0.2, "{kurtosis}");
    }

    #[test]
    fn infinite_outer_scale_stays_finite() {
        let p = SpectrumParams { outer_scale: f64::INFINITY, ..SpectrumParams::reference() };
        let spec = VonKarman::new(p).unwrap();
        let g = PwdGenerator::new(PwdConfig { grid: GridSpec::square(8, 1.0).unwrap(), n_sh: 2 }, spec).unwrap();
        for index in 0..20 {
            assert!(g.generate(SampleSeed::new(9, index)).values.iter().all(|z| z.is_finite()));
        }
    }
}
