//! Log-uniform ring partitions of the wave-vector plane and uniform-in-area
//! sampling of rings and disks.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// One segment of a [`RingPartition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// The disk `k < radius`.
    Disk { radius: f64 },
    /// The annulus `lo ≤ k < hi`.
    Ring { lo: f64, hi: f64 },
}

impl Segment {
    pub fn inner(&self) -> f64 {
        match *self {
            Segment::Disk { .. } => 0.0,
            Segment::Ring { lo, .. } => lo,
        }
    }

    pub fn outer(&self) -> f64 {
        match *self {
            Segment::Disk { radius } => radius,
            Segment::Ring { hi, .. } => hi,
        }
    }

    /// Area in the wave-vector plane, `π (outer² − inner²)`.
    pub fn area(&self) -> f64 {
        let (lo, hi) = (self.inner(), self.outer());
        PI * (hi * hi - lo * lo)
    }
}

/// Boundaries `K_0 < K_1 < … < K_N` with `K_n = K_MIN (K_MAX/K_MIN)^(n/N)`,
/// optionally preceded by the disk `k < K_MIN`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingPartition {
    boundaries: Vec<f64>,
    include_inner_disk: bool,
}

impl RingPartition {
    pub fn log_uniform(k_min: f64, k_max: f64, rings: usize, include_inner_disk: bool) -> Result<Self> {
        if !(k_min > 0.0) {
            return Err(Error::argument(format!("K_MIN = {k_min} must be positive")));
        }
        if !(k_max > k_min) || !k_max.is_finite() {
            return Err(Error::argument(format!("K_MAX = {k_max} must exceed K_MIN = {k_min}")));
        }
        if rings == 0 {
            return Err(Error::argument("a partition needs at least one ring"));
        }
        let log_ratio = (k_max / k_min).ln();
        let mut boundaries: Vec<f64> =
            (0..=rings).map(|n| k_min * (log_ratio * n as f64 / rings as f64).exp()).collect();
        boundaries[0] = k_min;
        boundaries[rings] = k_max;
        Ok(RingPartition { boundaries, include_inner_disk })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn k_min(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn k_max(&self) -> f64 {
        self.boundaries[self.boundaries.len() - 1]
    }

    pub fn ring_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn includes_inner_disk(&self) -> bool {
        self.include_inner_disk
    }

    /// Number of segments, the disk included.
    pub fn segment_count(&self) -> usize {
        self.ring_count() + usize::from(self.include_inner_disk)
    }

    /// Segments from the origin outwards.
    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        let disk = self.include_inner_disk.then(|| Segment::Disk { radius: self.k_min() });
        disk.into_iter().chain(self.boundaries.windows(2).map(|w| Segment::Ring { lo: w[0], hi: w[1] }))
    }
}

/// Maps `u ∈ [0, 1]` to a wavenumber uniformly distributed by area over the
/// annulus `[lo, hi]`: `k = √(lo² + u (hi² − lo²))`.
#[inline]
pub fn sample_annulus_wavenumber(lo: f64, hi: f64, u: f64) -> f64 {
    (lo * lo + u * (hi * hi - lo * lo)).sqrt()
}

/// Maps `(u1, u2)` to a wave vector uniform over the disk `k < radius`.
#[inline]
pub fn sample_disk_wavevector(radius: f64, u1: f64, u2: f64) -> (f64, f64) {
    let k = radius * u1.sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (k * c, k * s)
}
