//! Sparse-spectrum screens: one random wave vector per partition segment.
//!
//! Both variants draw `k_n` uniformly by area in segment `n` and
//! `θ_n ~ U(0, 2π)`. They differ in the amplitude:
//!
//! * SS: `a_n = (α + iβ) √s_n` with the fixed segment power `s_n`;
//! * SU: `a_n = (α + iβ) √(S_n Φ(k_n))` with segment area `S_n`, a compound
//!   amplitude whose variance follows the drawn wave vector.
//!
//! In both cases `E|a_n|² = 2 s_n`. SU is unbiased for every `N`; SS carries a
//! small bias because the wave vector distribution inside a ring is only
//! approximately proportional to `Φ`.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;

use crate::dft::Cell;
use crate::error::{Error, Result};
use crate::generator::ScreenGenerator;
use crate::grid::{ComplexScreen, GridSpec};
use crate::partition::{sample_annulus_wavenumber, sample_disk_wavevector, RingPartition, Segment};
use crate::rng::{Component, SampleRng, SampleSeed};
use crate::spectrum::{band_power, IsotropicSpectrum, SpectrumParams};
use crate::waves::{plane_wave_grid, plane_wave_points};

/// Redraws allowed when a drawn wavenumber underflows onto a singular origin.
const MAX_REDRAWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SparseMethod {
    Ss,
    Su,
    /// SU for segments lying entirely below `k_star`, SS for the rest.
    Hybrid {
        k_star: f64,
    },
}

/// Amplitude law of the inner disk under SS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiskAmplitude {
    /// `√(S Φ(k))`, as SU does.
    #[default]
    Compound,
    /// `√s_0`, the plain SS rule.
    RingVariance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseConfig {
    pub partition: RingPartition,
    pub method: SparseMethod,
    pub disk_amplitude: DiskAmplitude,
}

impl SparseConfig {
    pub fn new(partition: RingPartition, method: SparseMethod) -> Self {
        SparseConfig { partition, method, disk_amplitude: DiskAmplitude::default() }
    }

    /// `n_components` segments covering `(0, 2κm)`: the disk `k < κ0` and
    /// `n_components − 1` log-uniform rings.
    pub fn covering(params: &SpectrumParams, n_components: usize, method: SparseMethod) -> Result<Self> {
        if n_components < 2 {
            return Err(Error::argument("need at least two components (disk and one ring)"));
        }
        let k_min = params.kappa0();
        if k_min == 0.0 {
            return Err(Error::argument("without an outer scale k_min must be given explicitly"));
        }
        let partition = RingPartition::log_uniform(k_min, 2.0 * params.kappa_m(), n_components - 1, true)?;
        Ok(Self::new(partition, method))
    }

    pub fn n_components(&self) -> usize {
        self.partition.segment_count()
    }
}

/// Per-sample wave vectors and amplitudes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseComponentSet {
    pub k: Vec<f64>,
    pub theta: Vec<f64>,
    pub amplitude: Vec<Complex64>,
    /// Segment power `s_n`; `E|a_n|² = 2 s_n`.
    pub variance: Vec<f64>,
}

impl SparseComponentSet {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Cartesian wave vectors `(k cos θ, k sin θ)`.
    pub fn wave_vectors(&self) -> (Vec<f64>, Vec<f64>) {
        self.k
            .iter()
            .zip(&self.theta)
            .map(|(&k, &t)| {
                let (s, c) = t.sin_cos();
                (k * c, k * s)
            })
            .unzip()
    }
}

/// `s_n = 2π ∫ k Φ(k) dk` over each segment, disk first. A disk under a
/// spectrum without outer scale has infinite power and reports `+∞`.
pub fn ss_component_variances(partition: &RingPartition, spectrum: &dyn IsotropicSpectrum) -> Result<Vec<f64>> {
    partition
        .segments()
        .map(|seg| match band_power(seg.inner(), seg.outer(), spectrum) {
            Err(Error::Singularity { .. }) => Ok(f64::INFINITY),
            other => other,
        })
        .collect()
}

/// Evaluates the series on a grid as one matrix product.
pub fn evaluate_separable(components: &SparseComponentSet, grid: &GridSpec) -> Array2<Complex64> {
    let (p, q) = components.wave_vectors();
    plane_wave_grid(&p, &q, &components.amplitude, grid)
}

/// Evaluates the series at arbitrary points.
pub fn evaluate_points(components: &SparseComponentSet, points: &[(f64, f64)]) -> Vec<Complex64> {
    let (p, q) = components.wave_vectors();
    plane_wave_points(&p, &q, &components.amplitude, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Fixed,
    Compound,
}

pub struct SparseGenerator<S> {
    cfg: SparseConfig,
    spectrum: S,
    grid: GridSpec,
    segments: Vec<Segment>,
    variances: Vec<f64>,
    rules: Vec<Rule>,
}

impl<S: IsotropicSpectrum> SparseGenerator<S> {
    pub fn new(cfg: SparseConfig, spectrum: S, grid: GridSpec) -> Result<Self> {
        let segments: Vec<Segment> = cfg.partition.segments().collect();
        let variances = ss_component_variances(&cfg.partition, &spectrum)?;
        let rules = segments
            .iter()
            .zip(&variances)
            .map(|(seg, &s)| {
                let ss_rule = match seg {
                    Segment::Disk { .. } if cfg.disk_amplitude == DiskAmplitude::Compound || !s.is_finite() => {
                        Rule::Compound
                    }
                    _ => Rule::Fixed,
                };
                match cfg.method {
                    SparseMethod::Su => Rule::Compound,
                    SparseMethod::Ss => ss_rule,
                    SparseMethod::Hybrid { k_star } if seg.outer() <= k_star => Rule::Compound,
                    SparseMethod::Hybrid { .. } => ss_rule,
                }
            })
            .collect();
        Ok(SparseGenerator { cfg, spectrum, grid, segments, variances, rules })
    }

    pub fn config(&self) -> &SparseConfig {
        &self.cfg
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Number of segments using compound amplitudes.
    pub fn compound_count(&self) -> usize {
        self.rules.iter().filter(|r| **r == Rule::Compound).count()
    }

    pub fn draw(&self, seed: SampleSeed) -> SparseComponentSet {
        let mut rng = seed.stream(Component::Sparse);
        let n = self.segments.len();
        let mut set = SparseComponentSet {
            k: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            amplitude: Vec::with_capacity(n),
            variance: self.variances.clone(),
        };
        for ((seg, &s), &rule) in self.segments.iter().zip(&self.variances).zip(&self.rules) {
            let (k, theta, amplitude) = match rule {
                Rule::Fixed => {
                    let (k, theta) = draw_in_segment(seg, &mut rng);
                    (k, theta, rng.complex_normal() * s.sqrt())
                }
                Rule::Compound => {
                    let (k, theta, phi) = draw_compound(seg, &self.spectrum, &mut rng);
                    (k, theta, rng.complex_normal() * (seg.area() * phi).sqrt())
                }
            };
            set.k.push(k);
            set.theta.push(theta);
            set.amplitude.push(amplitude);
        }
        set
    }

    /// One sample at arbitrary points instead of the grid.
    pub fn generate_points(&self, seed: SampleSeed, points: &[(f64, f64)]) -> Vec<Complex64> {
        evaluate_points(&self.draw(seed), points)
    }
}

impl<S: IsotropicSpectrum> ScreenGenerator for SparseGenerator<S> {
    fn grid(&self) -> GridSpec {
        self.grid
    }

    fn generate(&self, seed: SampleSeed) -> ComplexScreen {
        let values = evaluate_separable(&self.draw(seed), &self.grid);
        ComplexScreen { grid: self.grid, values, sample_index: seed.index }
    }
}

fn draw_in_segment(seg: &Segment, rng: &mut SampleRng) -> (f64, f64) {
    match *seg {
        Segment::Disk { radius } => {
            let (u1, u2) = (rng.uniform(), rng.uniform());
            (radius * u1.sqrt(), 2.0 * PI * u2)
        }
        Segment::Ring { lo, hi } => {
            let k = sample_annulus_wavenumber(lo, hi, rng.uniform());
            (k, 2.0 * PI * rng.uniform())
        }
    }
}

fn draw_compound(seg: &Segment, spectrum: &dyn IsotropicSpectrum, rng: &mut SampleRng) -> (f64, f64, f64) {
    let mut tries = 0;
    loop {
        let (k, theta) = draw_in_segment(seg, rng);
        let phi = spectrum.density(k);
        if (k > 0.0 && phi.is_finite()) || tries >= MAX_REDRAWS {
            return (k, theta, phi);
        }
        tries += 1;
    }
}

/// Region of the wave-vector plane sampled by [`single_component_screen`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega {
    Ring { lo: f64, hi: f64 },
    Disk { radius: f64 },
    Rect(Cell),
}

impl Omega {
    pub fn area(&self) -> f64 {
        match *self {
            Omega::Ring { lo, hi } => Segment::Ring { lo, hi }.area(),
            Omega::Disk { radius } => Segment::Disk { radius }.area(),
            Omega::Rect(cell) => cell.area(),
        }
    }

    fn draw(&self, rng: &mut SampleRng) -> (f64, f64) {
        match *self {
            Omega::Ring { lo, hi } => {
                let k = sample_annulus_wavenumber(lo, hi, rng.uniform());
                let (s, c) = (2.0 * PI * rng.uniform()).sin_cos();
                (k * c, k * s)
            }
            Omega::Disk { radius } => sample_disk_wavevector(radius, rng.uniform(), rng.uniform()),
            Omega::Rect(cell) => (rng.uniform_in(cell.p.0, cell.p.1), rng.uniform_in(cell.q.0, cell.q.1)),
        }
    }
}

/// One compound-amplitude plane wave with wave vector uniform on `omega`,
/// evaluated at `points`.
///
/// Its complex structure function is `4 ∬_Ω Φ(κ)(1 − cos κ·r) d²κ` exactly.
pub fn single_component_screen(
    omega: &Omega,
    spectrum: &dyn IsotropicSpectrum,
    points: &[(f64, f64)],
    rng: &mut SampleRng,
) -> Result<Vec<Complex64>> {
    let area = omega.area();
    if !(area > 0.0) {
        return Err(Error::argument("sampling region must have positive area"));
    }
    let (p, q) = omega.draw(rng);
    let phi = spectrum.density_xy(p, q);
    let a = rng.complex_normal() * (area * phi).sqrt();
    Ok(plane_wave_points(&[p], &[q], &[a], points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::VonKarman;
    use proptest::prelude::*;

    struct Flat(f64);
    impl IsotropicSpectrum for Flat {
        fn density(&self, _: f64) -> f64 {
            self.0
        }
        fn support_max(&self) -> f64 {
            1e5
        }
    }

    fn vk() -> VonKarman {
        VonKarman::new(SpectrumParams::reference()).unwrap()
    }

    fn reference_config(n: usize, method: SparseMethod) -> SparseConfig {
        SparseConfig::covering(&SpectrumParams::reference(), n, method).unwrap()
    }

    #[test]
    fn variances_sum_to_whole_band() {
        let spec = vk();
        let cfg = reference_config(501, SparseMethod::Ss);
        let s = ss_component_variances(&cfg.partition, &spec).unwrap();
        assert_eq!(s.len(), 501);
        let total = band_power(0.0, cfg.partition.k_max(), &spec).unwrap();
        let sum: f64 = s.iter().sum();
        assert!((sum / total - 1.0).abs() < 1e-8, "{sum} vs {total}");
        // High-precision reference values for the disk and a few rings.
        let golden = [
            (0, 2.55359704520934982508e-01),
            (1, 5.39957985622782892648e-03),
            (100, 6.94672239004218670944e-04),
            (250, 5.08690980876732752321e-06),
            (400, 3.33921961261900901244e-08),
            (500, 2.62900007116649050963e-11),
        ];
        for (i, g) in golden {
            assert!((s[i] / g - 1.0).abs() < 1e-8, "s[{i}] = {}", s[i]);
        }
    }

    #[test]
    fn one_ring_partition() {
        let spec = vk();
        let p = RingPartition::log_uniform(1.0, 100.0, 1, false).unwrap();
        let s = ss_component_variances(&p, &spec).unwrap();
        assert_eq!(s, vec![band_power(1.0, 100.0, &spec).unwrap()]);
    }

    #[test]
    fn su_with_flat_spectrum_matches_ss() {
        let flat = Flat(0.7);
        let p = RingPartition::log_uniform(1.0, 50.0, 6, true).unwrap();
        let grid = GridSpec::line(4, 1.0).unwrap();
        let ss = SparseGenerator::new(
            SparseConfig {
                disk_amplitude: DiskAmplitude::RingVariance,
                ..SparseConfig::new(p.clone(), SparseMethod::Ss)
            },
            &flat,
            grid,
        )
        .unwrap();
        let su = SparseGenerator::new(SparseConfig::new(p, SparseMethod::Su), &flat, grid).unwrap();
        let seed = SampleSeed::new(1, 1);
        let (a, b) = (ss.draw(seed), su.draw(seed));
        assert_eq!(a.k, b.k);
        for (x, y) in a.amplitude.iter().zip(&b.amplitude) {
            assert!((x - y).norm() <= 1e-13 * x.norm());
        }
    }

    #[test]
    fn su_amplitude_power_matches_segment_power() {
        let spec = vk();
        let p = RingPartition::log_uniform(5.0, 10.0, 1, false).unwrap();
        let g = SparseGenerator::new(SparseConfig::new(p, SparseMethod::Su), &spec, GridSpec::line(1, 1.0).unwrap())
            .unwrap();
        let s = g.variances()[0];
        let n = 100_000;
        let power: Vec<f64> = (0..n).map(|i| g.draw(SampleSeed::new(3, i)).amplitude[0].norm_sqr()).collect();
        let mean = power.iter().sum::<f64>() / n as f64;
        let var = power.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 2.0 * s).abs() < 3.0 * (var / n as f64).sqrt(), "{mean} vs {}", 2.0 * s);
    }

    #[test]
    fn draws_stay_in_their_segments() {
        let spec = vk();
        for method in [SparseMethod::Ss, SparseMethod::Su] {
            let cfg = reference_config(50, method);
            let bounds: Vec<(f64, f64)> = cfg.partition.segments().map(|s| (s.inner(), s.outer())).collect();
            let g = SparseGenerator::new(cfg, &spec, GridSpec::line(2, 1.0).unwrap()).unwrap();
            for i in 0..10_000 / 50 * 50 {
                let set = g.draw(SampleSeed::new(4, i));
                for ((&k, a), (lo, hi)) in set.k.iter().zip(&set.amplitude).zip(&bounds) {
                    assert!(k >= *lo && k <= *hi && a.is_finite());
                }
            }
        }
    }

    #[test]
    fn hybrid_degenerates_to_pure_methods() {
        let spec = vk();
        let grid = GridSpec::line(8, 1.0).unwrap();
        let seed = SampleSeed::new(12, 0);
        let build = |m| SparseGenerator::new(reference_config(40, m), &spec, grid).unwrap();
        let ss = build(SparseMethod::Ss);
        let su = build(SparseMethod::Su);
        let low = build(SparseMethod::Hybrid { k_star: 0.1 });
        let high = build(SparseMethod::Hybrid { k_star: 1e6 });
        assert_eq!(low.draw(seed), ss.draw(seed));
        assert_eq!(high.draw(seed), su.draw(seed));
        let mid = build(SparseMethod::Hybrid { k_star: 100.0 });
        assert!(mid.compound_count() > 1 && mid.compound_count() < 40);
    }

    #[test]
    fn separable_matches_direct_evaluation() {
        let mut rng = SampleSeed::new(7, 0).stream(Component::Auxiliary);
        let set = SparseComponentSet {
            k: (0..5).map(|_| rng.uniform_in(0.5, 300.0)).collect(),
            theta: (0..5).map(|_| rng.uniform_in(0.0, 2.0 * PI)).collect(),
            amplitude: (0..5).map(|_| rng.complex_normal()).collect(),
            variance: vec![1.0; 5],
        };
        let grid = GridSpec::square(16, 0.5).unwrap();
        let fast = evaluate_separable(&set, &grid);
        let scale = fast.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for l in 0..16 {
            for j in 0..16 {
                let (x, y) = (grid.x(j), grid.y(l));
                let direct: Complex64 = (0..5)
                    .map(|n| {
                        set.amplitude[n] * Complex64::cis(set.k[n] * (x * set.theta[n].cos() + y * set.theta[n].sin()))
                    })
                    .sum();
                assert!((fast[[l, j]] - direct).norm() <= 1e-10 * scale);
                assert!((evaluate_points(&set, &[(x, y)])[0] - direct).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn trivial_evaluations() {
        let set = SparseComponentSet {
            k: vec![3.0, 8.0],
            theta: vec![0.4, 2.0],
            amplitude: vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)],
            variance: vec![1.0, 1.0],
        };
        let origin = evaluate_separable(&set, &GridSpec::square(1, 1.0).unwrap());
        assert_eq!(origin[[0, 0]], set.amplitude[0] + set.amplitude[1]);
        assert!(evaluate_points(&set, &[]).is_empty());

        // A single plane wave is constant along its wavefront.
        let one = SparseComponentSet {
            k: vec![3.0],
            theta: vec![0.4],
            amplitude: vec![Complex64::new(1.0, 2.0)],
            variance: vec![1.0],
        };
        let (s, c) = 0.4f64.sin_cos();
        let pts: Vec<(f64, f64)> = [0.0, 1.0, 2.5].iter().map(|t| (0.3 - t * s, 0.1 + t * c)).collect();
        let v = evaluate_points(&one, &pts);
        assert!((v[0] - v[1]).norm() < 1e-13 && (v[0] - v[2]).norm() < 1e-13);
    }

    #[test]
    fn infinite_outer_scale_disk() {
        let params = SpectrumParams { outer_scale: f64::INFINITY, ..SpectrumParams::reference() };
        let spec = VonKarman::new(params).unwrap();
        assert!(SparseConfig::covering(&params, 10, SparseMethod::Ss).is_err());
        let p = RingPartition::log_uniform(0.1, 2.0 * params.kappa_m(), 100, true).unwrap();
        let g = SparseGenerator::new(SparseConfig::new(p, SparseMethod::Ss), &spec, GridSpec::line(4, 1.0).unwrap())
            .unwrap();
        assert!(g.variances()[0].is_infinite());
        for i in 0..100 {
            assert!(g.generate(SampleSeed::new(2, i)).values.iter().all(|z| z.is_finite()));
        }
    }

    #[test]
    fn single_component_at_zero_separation() {
        let spec = vk();
        let mut rng = SampleSeed::new(0, 0).stream(Component::Auxiliary);
        let omega = Omega::Ring { lo: 5.0, hi: 10.0 };
        let v = single_component_screen(&omega, &spec, &[(0.2, 0.3), (0.2, 0.3)], &mut rng).unwrap();
        assert_eq!(v[0] - v[1], Complex64::new(0.0, 0.0));
        assert!(single_component_screen(&Omega::Disk { radius: 0.0 }, &spec, &[(0.0, 0.0)], &mut rng).is_err());
    }

    #[test]
    fn rect_omega_matches_pwd_cell_law() {
        // A rectangle draws a uniform wave vector in the cell and a
        // √(area Φ) amplitude, exactly one PWD term.
        let spec = vk();
        let cell = Cell::centered(2.0 * PI, 0.0, 2.0 * PI);
        let omega = Omega::Rect(cell);
        let n = 20_000;
        let mean = (0..n)
            .map(|i| {
                let mut rng = SampleSeed::new(5, i).stream(Component::Auxiliary);
                single_component_screen(&omega, &spec, &[(0.0, 0.0)], &mut rng).unwrap()[0].norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        let exact = crate::dft::frehlich_cell_variance(&cell, &spec).unwrap();
        assert!((mean / exact - 1.0).abs() < 0.03, "{mean} vs {exact}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn partition_power_is_additive(k_min in 0.1f64..5.0, span in 2.0f64..1e4, n in 1usize..200) {
            let spec = vk();
            let p = RingPartition::log_uniform(k_min, k_min * span, n, true).unwrap();
            let sum: f64 = ss_component_variances(&p, &spec).unwrap().iter().sum();
            let whole = band_power(0.0, p.k_max(), &spec).unwrap();
            prop_assert!((sum / whole - 1.0).abs() < 1e-8);
        }
    }
}
