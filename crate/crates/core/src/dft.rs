//! FFT phase screens with optional subharmonic and Frehlich corrections.
//!
//! The main series is
//!
//! ```text
//! ψ(jΔx, lΔx) = Σ_{m,n=-N/2}^{N/2-1} a_{m,n} exp(2πi(mj + nl)/N),   E|a_{m,n}|² = 2Δk² Φ(mΔk, nΔk)
//! ```
//!
//! with the piston term `a_{0,0}` removed. Subharmonics add, for each level
//! `p = 1..=N_SH`, the eight neighbours of the origin on the lattice of step
//! `Δk/3^p`.
//!
//! Amplitudes are stored in FFT bin order: `bins[[nb, mb]]` holds `a_{m,n}`
//! with `m ≡ mb`, `n ≡ nb (mod N)`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::generator::ScreenGenerator;
use crate::grid::{ComplexScreen, GridSpec};
use crate::quad::integrate_rect;
use crate::rng::{Component, SampleSeed};
use crate::spectrum::IsotropicSpectrum;
use crate::waves::plane_wave_grid;

const CELL_TOL: f64 = 1e-8;

/// How subharmonic (and optionally DFT) cell variances are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceMode {
    /// `2 (Δk_p)² Φ` at the cell centre.
    #[default]
    Rectangle,
    /// `2 ∬_cell Φ`, the exact cell integral.
    Frehlich,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ShConfig {
    pub n_sh: u32,
    pub variance_mode: VarianceMode,
    /// Also integrate the main DFT cells instead of point-sampling them.
    pub apply_frehlich_to_dft: bool,
}

impl ShConfig {
    pub fn subharmonics(n_sh: u32) -> Self {
        ShConfig { n_sh, ..Self::default() }
    }

    pub fn frehlich(n_sh: u32) -> Self {
        ShConfig { n_sh, variance_mode: VarianceMode::Frehlich, apply_frehlich_to_dft: false }
    }
}

/// An axis-aligned rectangle `[p0, p1] × [q0, q1]` in the wave-vector plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub p: (f64, f64),
    pub q: (f64, f64),
}

impl Cell {
    /// Square cell of side `side` centred on `(pc, qc)`.
    pub fn centered(pc: f64, qc: f64, side: f64) -> Self {
        let h = 0.5 * side;
        Cell { p: (pc - h, pc + h), q: (qc - h, qc + h) }
    }

    pub fn area(&self) -> f64 {
        (self.p.1 - self.p.0).max(0.0) * (self.q.1 - self.q.0).max(0.0)
    }

    fn contains_origin(&self) -> bool {
        self.p.0 <= 0.0 && self.p.1 >= 0.0 && self.q.0 <= 0.0 && self.q.1 >= 0.0
    }
}

/// Variance `2 ∬_cell Φ(p, q) dp dq` of the spectral amplitude covering `cell`.
///
/// For a constant spectrum this is `2 Φ · area`, the rectangle-rule value.
/// A cell touching the origin is split there so the peak of `Φ` sits on a
/// corner of each piece. Spectra without an outer scale are not integrable
/// over such a cell (`Φ ~ k^{-2-α}`) and yield [`Error::Singularity`].
pub fn frehlich_cell_variance(cell: &Cell, spectrum: &dyn IsotropicSpectrum) -> Result<f64> {
    if cell.area() == 0.0 {
        return Ok(0.0);
    }
    if cell.contains_origin() && spectrum.singular_at_origin() {
        return Err(Error::Singularity { k: 0.0 });
    }
    let split = |(a, b): (f64, f64)| -> Vec<(f64, f64)> {
        if a < 0.0 && b > 0.0 {
            vec![(a, 0.0), (0.0, b)]
        } else {
            vec![(a, b)]
        }
    };
    let mut total = 0.0;
    for px in split(cell.p) {
        for qy in split(cell.q) {
            total += integrate_rect(|p, q| spectrum.density_xy(p, q), px, qy, CELL_TOL)?;
        }
    }
    Ok(2.0 * total)
}

/// Signed frequency index of FFT bin `bin` on an `n`-point axis.
#[inline]
pub fn signed_frequency(bin: usize, n: usize) -> i64 {
    if bin < n / 2 {
        bin as i64
    } else {
        bin as i64 - n as i64
    }
}

/// One fixed-frequency subharmonic term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subharmonic {
    pub level: u32,
    pub p: f64,
    pub q: f64,
    /// `E|a|²`.
    pub variance: f64,
}

/// Precomputed DFT / DFT-SH generator.
pub struct DftGenerator<S> {
    grid: GridSpec,
    spectrum: S,
    cfg: ShConfig,
    /// `E|a|²` per bin.
    variance: Array2<f64>,
    /// `√(E|a|²/2)`, the factor multiplying a standard complex normal.
    scale: Array2<f64>,
    subharmonics: Vec<Subharmonic>,
    fft: Arc<dyn Fft<f64>>,
}

impl<S: IsotropicSpectrum> DftGenerator<S> {
    pub fn new(grid: GridSpec, spectrum: S, cfg: ShConfig) -> Result<Self> {
        grid.require_fft_layout()?;
        let n = grid.nx;
        let dk = grid.dk();
        let mut variance = Array2::<f64>::zeros((n, n));
        for ((nb, mb), v) in variance.indexed_iter_mut() {
            let (m, k) = (signed_frequency(mb, n), signed_frequency(nb, n));
            if m == 0 && k == 0 {
                continue;
            }
            let (p, q) = (m as f64 * dk, k as f64 * dk);
            *v = if cfg.apply_frehlich_to_dft {
                frehlich_cell_variance(&Cell::centered(p, q, dk), &spectrum)?
            } else {
                2.0 * dk * dk * spectrum.density_xy(p, q)
            };
        }
        if let Some(bad) = variance.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite DFT cell variance {bad}")));
        }
        let scale = variance.mapv(|v| (0.5 * v).sqrt());
        let subharmonics = subharmonic_terms(dk, &cfg, &spectrum)?;
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Ok(DftGenerator { grid, spectrum, cfg, variance, scale, subharmonics, fft })
    }

    pub fn config(&self) -> &ShConfig {
        &self.cfg
    }

    pub fn spectrum(&self) -> &S {
        &self.spectrum
    }

    /// Per-bin `E|a|²` in FFT bin order.
    pub fn bin_variances(&self) -> ArrayView2<'_, f64> {
        self.variance.view()
    }

    pub fn subharmonics(&self) -> &[Subharmonic] {
        &self.subharmonics
    }

    /// Main-series amplitudes of sample `seed`, in FFT bin order.
    pub fn dft_amplitudes(&self, seed: SampleSeed) -> Array2<Complex64> {
        let mut rng = seed.stream(Component::Dft);
        self.scale.mapv(|s| rng.complex_normal() * s)
    }

    /// Subharmonic amplitudes of sample `seed`, aligned with [`Self::subharmonics`].
    pub fn subharmonic_amplitudes(&self, seed: SampleSeed) -> Vec<Complex64> {
        let mut rng = seed.stream(Component::Subharmonic);
        self.subharmonics.iter().map(|t| rng.complex_normal() * (0.5 * t.variance).sqrt()).collect()
    }

    /// The main series and the subharmonic series of one sample, separately.
    /// They draw from disjoint random streams, so the first part does not
    /// depend on the subharmonic configuration.
    pub fn generate_parts(&self, seed: SampleSeed) -> (ComplexScreen, ComplexScreen) {
        let mut main = self.dft_amplitudes(seed);
        inverse_fft2(&mut main, self.fft.as_ref());
        let sh = if self.subharmonics.is_empty() {
            Array2::zeros(main.dim())
        } else {
            let amps = self.subharmonic_amplitudes(seed);
            let p: Vec<f64> = self.subharmonics.iter().map(|t| t.p).collect();
            let q: Vec<f64> = self.subharmonics.iter().map(|t| t.q).collect();
            plane_wave_grid(&p, &q, &amps, &self.grid)
        };
        let wrap = |values| ComplexScreen { grid: self.grid, values, sample_index: seed.index };
        (wrap(main), wrap(sh))
    }

    /// Exact structure function of the real part at grid offsets `(j, l)`:
    /// `Σ_t E|a_t|² (1 − cos(k_t · r))` over every term of the series.
    pub fn analytic_structure_function(&self, offsets: &[(i64, i64)]) -> Vec<f64> {
        let n = self.grid.nx as i64;
        let dx = self.grid.dx();
        let cos_table: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).cos()).collect();
        offsets
            .iter()
            .map(|&(j, l)| {
                let mut d = 0.0;
                for ((nb, mb), &v) in self.variance.indexed_iter() {
                    if v == 0.0 {
                        continue;
                    }
                    let m = signed_frequency(mb, n as usize);
                    let k = signed_frequency(nb, n as usize);
                    let phase = (m * j + k * l).rem_euclid(n) as usize;
                    d += v * (1.0 - cos_table[phase]);
                }
                for t in &self.subharmonics {
                    d += t.variance * (1.0 - (t.p * j as f64 * dx + t.q * l as f64 * dx).cos());
                }
                d
            })
            .collect()
    }
}

impl<S: IsotropicSpectrum> ScreenGenerator for DftGenerator<S> {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn generate(&self, seed: SampleSeed) -> ComplexScreen {
        let (mut main, sh) = self.generate_parts(seed);
        if !self.subharmonics.is_empty() {
            main.values += &sh.values;
        }
        main
    }
}

fn subharmonic_terms(dk: f64, cfg: &ShConfig, spectrum: &dyn IsotropicSpectrum) -> Result<Vec<Subharmonic>> {
    let mut terms = Vec::with_capacity(8 * cfg.n_sh as usize);
    for level in 1..=cfg.n_sh {
        let dkp = dk / 3f64.powi(level as i32);
        for n in -1i32..=1 {
            for m in -1i32..=1 {
                if m == 0 && n == 0 {
                    continue;
                }
                let (p, q) = (m as f64 * dkp, n as f64 * dkp);
                let variance = match cfg.variance_mode {
                    VarianceMode::Rectangle => 2.0 * dkp * dkp * spectrum.density_xy(p, q),
                    VarianceMode::Frehlich => frehlich_cell_variance(&Cell::centered(p, q, dkp), spectrum)?,
                };
                terms.push(Subharmonic { level, p, q, variance });
            }
        }
    }
    Ok(terms)
}

/// Unnormalized 2-D inverse transform in place: rows, then columns.
pub(crate) fn inverse_fft2(buf: &mut Array2<Complex64>, fft: &dyn Fft<f64>) {
    let slice = buf.as_slice_mut().expect("standard layout");
    fft.process(slice);
    let mut t = buf.t().as_standard_layout().into_owned();
    fft.process(t.as_slice_mut().expect("standard layout"));
    buf.assign(&t.t());
}

/// `Σ_{m,n} a_{m,n} exp(2πi(mj + nl)/N)` at one (possibly out-of-range)
/// grid index, by direct summation.
pub fn dft_direct_at(bins: &Array2<Complex64>, j: i64, l: i64) -> Complex64 {
    let n = bins.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for ((nb, mb), &a) in bins.indexed_iter() {
        let m = signed_frequency(mb, n);
        let k = signed_frequency(nb, n);
        let phase = (m * j + k * l).rem_euclid(n as i64) as f64;
        acc += a * Complex64::cis(2.0 * PI * phase / n as f64);
    }
    acc
}

/// Direct-summation counterpart of the FFT path, for validation.
pub fn dft_direct_sum(bins: &Array2<Complex64>) -> Array2<Complex64> {
    let n = bins.nrows();
    Array2::from_shape_fn((n, n), |(l, j)| dft_direct_at(bins, j as i64, l as i64))
}

/// Exact structure function of plain DFT screens (no subharmonics) at grid
/// offsets `(j, l)`.
pub fn analytic_dft_sf(grid: GridSpec, spectrum: &dyn IsotropicSpectrum, offsets: &[(i64, i64)]) -> Result<Vec<f64>> {
    Ok(DftGenerator::new(grid, spectrum, ShConfig::default())?.analytic_structure_function(offsets))
}
