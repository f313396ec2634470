//! Sample structure functions and accuracy metrics.
//!
//! Moments are accumulated per screen in ordinary floating point and then
//! folded into exact (error-free) running sums, so the totals are independent
//! of the order in which screens arrive or accumulators are merged.

use std::ops::Range;

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::ScreenGenerator;
use crate::grid::{ComplexScreen, GridSpec};
use crate::rng::SampleSeed;

/// Exact floating-point sum kept as non-overlapping partials
/// (Shewchuk's algorithm); [`ExactSum::value`] is the correctly rounded total.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for &p in &other.partials {
            self.add(p);
        }
    }

    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        // Round half-way cases using the sign of the next partial.
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

/// Direction of the separations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparationAxis {
    /// `(d, 0)` grid offsets.
    #[default]
    X,
    /// `(d, d)` grid offsets, for isotropy checks.
    Diagonal,
}

/// Sample-averaged structure function.
#[derive(Debug, Clone, PartialEq)]
pub struct SfEstimate {
    /// Grid offsets `d`.
    pub offsets: Vec<usize>,
    /// Physical separations in metres.
    pub separations: Vec<f64>,
    pub values: Vec<f64>,
    /// Pairs contributing to each value, summed over screens.
    pub pair_counts: Vec<u64>,
    /// Real screens used.
    pub n_samples: u64,
}

impl SfEstimate {
    /// σ against `target`, skipping zero separations.
    pub fn rms_relative_difference(&self, target: &[f64]) -> Result<f64> {
        if target.len() != self.values.len() {
            return Err(Error::argument("target and estimate lengths differ"));
        }
        let (est, tgt): (Vec<f64>, Vec<f64>) = self
            .separations
            .iter()
            .zip(self.values.iter().zip(target))
            .filter(|(r, _)| **r > 0.0)
            .map(|(_, (&e, &t))| (e, t))
            .unzip();
        rms_relative_difference(&est, &tgt)
    }
}

/// `σ = √(mean((D̂/D − 1)²))`.
pub fn rms_relative_difference(estimate: &[f64], target: &[f64]) -> Result<f64> {
    if estimate.len() != target.len() || estimate.is_empty() {
        return Err(Error::argument("need equally long, non-empty estimate and target"));
    }
    if let Some(i) = target.iter().position(|&t| t == 0.0 || !t.is_finite()) {
        return Err(Error::argument(format!("target value {} at index {i} is not usable", target[i])));
    }
    let ms = estimate.iter().zip(target).map(|(e, t)| (e / t - 1.0).powi(2)).sum::<f64>() / estimate.len() as f64;
    Ok(ms.sqrt())
}

/// Mergeable accumulator of `Σ Δφ²` and `Σ Δφ⁴` per separation.
#[derive(Debug, Clone, PartialEq)]
pub struct SfAccumulator {
    grid: GridSpec,
    axis: SeparationAxis,
    offsets: Vec<usize>,
    sum2: Vec<ExactSum>,
    sum4: Vec<ExactSum>,
    screens: u64,
}

impl SfAccumulator {
    pub fn new(grid: GridSpec, axis: SeparationAxis, offsets: &[usize]) -> Result<Self> {
        let limit = match axis {
            SeparationAxis::X => grid.nx,
            SeparationAxis::Diagonal => grid.nx.min(grid.ny),
        };
        if let Some(&d) = offsets.iter().find(|&&d| d >= limit) {
            return Err(Error::argument(format!("offset {d} leaves no pairs on a {}x{} grid", grid.nx, grid.ny)));
        }
        Ok(SfAccumulator {
            grid,
            axis,
            offsets: offsets.to_vec(),
            sum2: vec![ExactSum::default(); offsets.len()],
            sum4: vec![ExactSum::default(); offsets.len()],
            screens: 0,
        })
    }

    /// Same configuration, no data.
    pub fn empty_like(&self) -> Self {
        Self::new(self.grid, self.axis, &self.offsets).expect("validated configuration")
    }

    pub fn n_screens(&self) -> u64 {
        self.screens
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn separations(&self) -> Vec<f64> {
        let step = match self.axis {
            SeparationAxis::X => self.grid.dx(),
            SeparationAxis::Diagonal => self.grid.dx() * std::f64::consts::SQRT_2,
        };
        self.offsets.iter().map(|&d| d as f64 * step).collect()
    }

    fn pairs_per_screen(&self, d: usize) -> u64 {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        match self.axis {
            SeparationAxis::X => ((nx - d) * ny) as u64,
            SeparationAxis::Diagonal => ((nx - d) * (ny - d)) as u64,
        }
    }

    /// Adds one real screen.
    pub fn push_real(&mut self, screen: ArrayView2<'_, f64>) -> Result<()> {
        if screen.dim() != (self.grid.ny, self.grid.nx) {
            return Err(Error::argument(format!(
                "screen is {:?}, accumulator expects {}x{}",
                screen.dim(),
                self.grid.ny,
                self.grid.nx
            )));
        }
        let screen = screen.as_standard_layout();
        let ny = self.grid.ny;
        for (i, &d) in self.offsets.iter().enumerate() {
            let (mut s2, mut s4) = (0.0, 0.0);
            match self.axis {
                SeparationAxis::X => {
                    for row in screen.rows() {
                        let row = row.as_slice().expect("standard layout");
                        let (a, b) = moments(&row[d..], &row[..row.len() - d]);
                        s2 += a;
                        s4 += b;
                    }
                }
                SeparationAxis::Diagonal => {
                    for l in 0..ny - d {
                        let lower = screen.row(l);
                        let upper = screen.row(l + d);
                        let lower = lower.as_slice().expect("standard layout");
                        let upper = upper.as_slice().expect("standard layout");
                        let (a, b) = moments(&upper[d..], &lower[..lower.len() - d]);
                        s2 += a;
                        s4 += b;
                    }
                }
            }
            self.sum2[i].add(s2);
            self.sum4[i].add(s4);
        }
        self.screens += 1;
        Ok(())
    }

    /// Adds both real screens of a complex sample.
    pub fn push(&mut self, screen: &ComplexScreen) -> Result<()> {
        if screen.grid != self.grid {
            return Err(Error::argument("screen grid differs from accumulator grid"));
        }
        self.push_real(screen.real().view())?;
        self.push_real(screen.imag().view())
    }

    pub fn merge(&mut self, other: &SfAccumulator) -> Result<()> {
        if other.grid != self.grid || other.axis != self.axis || other.offsets != self.offsets {
            return Err(Error::argument("cannot merge accumulators with different configurations"));
        }
        for (a, b) in self.sum2.iter_mut().zip(&other.sum2) {
            a.merge(b);
        }
        for (a, b) in self.sum4.iter_mut().zip(&other.sum4) {
            a.merge(b);
        }
        self.screens += other.screens;
        Ok(())
    }

    /// Exact `Σ Δφ²` and `Σ Δφ⁴` per offset.
    pub fn raw_moments(&self) -> (Vec<f64>, Vec<f64>) {
        (self.sum2.iter().map(ExactSum::value).collect(), self.sum4.iter().map(ExactSum::value).collect())
    }

    pub fn estimate(&self) -> SfEstimate {
        let pair_counts: Vec<u64> = self.offsets.iter().map(|&d| self.pairs_per_screen(d) * self.screens).collect();
        let values = self
            .sum2
            .iter()
            .zip(&pair_counts)
            .map(|(s, &n)| if n == 0 { f64::NAN } else { s.value() / n as f64 })
            .collect();
        SfEstimate {
            offsets: self.offsets.clone(),
            separations: self.separations(),
            values,
            pair_counts,
            n_samples: self.screens,
        }
    }

    /// `σ_D² = ⟨Δφ⁴⟩ / ⟨Δφ²⟩² − 1`, pooled over pairs and screens.
    pub fn normalized_variance(&self) -> Result<Vec<f64>> {
        if self.screens < 2 {
            return Err(Error::argument("normalized variance needs at least two screens"));
        }
        self.offsets
            .iter()
            .zip(self.sum2.iter().zip(&self.sum4))
            .map(|(&d, (s2, s4))| {
                let n = (self.pairs_per_screen(d) * self.screens) as f64;
                let m2 = s2.value() / n;
                let m4 = s4.value() / n;
                if !(m2 > 0.0) {
                    return Err(Error::Numeric(format!("zero phase-difference variance at offset {d}")));
                }
                Ok(m4 / (m2 * m2) - 1.0)
            })
            .collect()
    }
}

/// `(Σ (a−b)², Σ (a−b)⁴)` with four independent lanes.
fn moments(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut s2 = [0.0; 4];
    let mut s4 = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            let d2 = d * d;
            s2[k] += d2;
            s4[k] += d2 * d2;
        }
    }
    for (x, y) in ra.iter().zip(rb) {
        let d = x - y;
        let d2 = d * d;
        s2[0] += d2;
        s4[0] += d2 * d2;
    }
    ((s2[0] + s2[1]) + (s2[2] + s2[3]), (s4[0] + s4[1]) + (s4[2] + s4[3]))
}

/// Structure function of a batch of real screens.
pub fn estimate_sf<'a, I>(screens: I, grid: GridSpec, offsets: &[usize]) -> Result<SfEstimate>
where
    I: IntoIterator<Item = ArrayView2<'a, f64>>,
{
    let mut acc = SfAccumulator::new(grid, SeparationAxis::X, offsets)?;
    for s in screens {
        acc.push_real(s)?;
    }
    Ok(acc.estimate())
}

/// Normalized variance of the structure-function estimate of a batch.
pub fn normalized_variance<'a, I>(screens: I, grid: GridSpec, offsets: &[usize]) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = ArrayView2<'a, f64>>,
{
    let mut acc = SfAccumulator::new(grid, SeparationAxis::X, offsets)?;
    for s in screens {
        acc.push_real(s)?;
    }
    acc.normalized_variance()
}

/// Generates complex samples `samples` of `generator` in parallel and
/// accumulates both real parts of each.
pub fn monte_carlo<G: ScreenGenerator + ?Sized>(
    generator: &G,
    master_seed: u64,
    samples: Range<u64>,
    template: &SfAccumulator,
) -> Result<SfAccumulator> {
    if template.grid != generator.grid() {
        return Err(Error::argument("accumulator grid differs from generator grid"));
    }
    samples
        .into_par_iter()
        .try_fold(
            || template.empty_like(),
            |mut acc, index| {
                acc.push(&generator.generate(SampleSeed::new(master_seed, index)))?;
                Ok(acc)
            },
        )
        .try_reduce(
            || template.empty_like(),
            |mut a, b| {
                a.merge(&b)?;
                Ok(a)
            },
        )
}
