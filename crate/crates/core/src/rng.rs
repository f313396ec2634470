//! Deterministic per-sample random streams.
//!
//! Every `(master_seed, sample_index, component)` triple keys its own ChaCha
//! stream, so samples can be generated in any order or in parallel and two
//! parts of one sample (say the DFT series and its subharmonics) never share
//! draws.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Which part of a sample a stream feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Component {
    /// Main DFT / PWD amplitudes.
    Dft = 1,
    /// Subharmonic amplitudes and shifts.
    Subharmonic = 2,
    /// The global PWD frequency shift.
    Shift = 3,
    /// Sparse-spectrum wave vectors and amplitudes.
    Sparse = 4,
    /// Free for callers (tests, single-component experiments).
    Auxiliary = 5,
}

/// Identifies one Monte-Carlo sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampleSeed {
    pub master: u64,
    pub index: u64,
}

impl SampleSeed {
    pub fn new(master: u64, index: u64) -> Self {
        SampleSeed { master, index }
    }

    pub fn stream(&self, component: Component) -> SampleRng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master.to_le_bytes());
        key[8..16].copy_from_slice(&self.index.to_le_bytes());
        key[16..24].copy_from_slice(&(component as u64).to_le_bytes());
        SampleRng(ChaCha8Rng::from_seed(key))
    }
}

/// A random stream with the handful of draws the generators need.
#[derive(Debug, Clone)]
pub struct SampleRng(ChaCha8Rng);

impl SampleRng {
    /// `U[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    /// `U(lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// `α + iβ` with `α, β` i.i.d. `N(0, 1)`; `E|z|² = 2`.
    #[inline]
    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.normal();
        let im = self.normal();
        Complex64::new(re, im)
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }
}
