//! Synthesis and statistical validation of turbulent phase screens.
//!
//! Four families of generators share one [`ScreenGenerator`] interface:
//!
//! * [`dft`]: FFT screens, optionally with subharmonics and exact cell variances;
//! * [`pwd`]: FFT screens on a randomly shifted frequency lattice;
//! * [`sparse`]: sparse-spectrum (SS) and sparse-uniform (SU) series.
//!
//! [`stats`] estimates structure functions from generated screens and
//! compares them with [`spectrum::target_structure_function`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod bench;
pub mod dft;
pub mod error;
pub mod generator;
pub mod grid;
pub mod io;
pub mod method;
pub mod partition;
pub mod pwd;
pub mod quad;
pub mod rng;
pub mod sparse;
pub mod special;
pub mod spectrum;
pub mod stats;
pub mod waves;

pub use error::{Error, Result};
pub use generator::ScreenGenerator;
pub use grid::{ComplexScreen, GridSpec};
pub use method::Method;
pub use rng::{Component, SampleSeed};
pub use spectrum::{IsotropicSpectrum, SpectrumParams, VonKarman};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/spectrum.md")]
    pub struct Spectrum;
    #[doc = include_str!("../../../book/src/generators.md")]
    pub struct Generators;
    #[doc = include_str!("../../../book/src/validation.md")]
    pub struct Validation;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
