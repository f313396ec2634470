use crate::dft::{DftGenerator, ShConfig};
use crate::error::Result;
use crate::generator::ScreenGenerator;
use crate::grid::GridSpec;
use crate::pwd::{PwdConfig, PwdGenerator};
use crate::sparse::{SparseConfig, SparseGenerator, SparseMethod};
use crate::spectrum::IsotropicSpectrum;

/// A generation method with its options, independent of grid and spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Dft(ShConfig),
    Pwd { n_sh: u32 },
    Sparse(SparseConfig),
}

impl Method {
    /// Short identifier: `dft`, `dft-sh`, `pwd`, `pwd-sh`, `ss`, `su` or `hybrid`.
    pub fn id(&self) -> &'static str {
        match self {
            Method::Dft(c) if c.n_sh == 0 => "dft",
            Method::Dft(_) => "dft-sh",
            Method::Pwd { n_sh: 0 } => "pwd",
            Method::Pwd { .. } => "pwd-sh",
            Method::Sparse(c) => match c.method {
                SparseMethod::Ss => "ss",
                SparseMethod::Su => "su",
                SparseMethod::Hybrid { .. } => "hybrid",
            },
        }
    }

    pub fn n_sh(&self) -> Option<u32> {
        match self {
            Method::Dft(c) => Some(c.n_sh),
            Method::Pwd { n_sh } => Some(*n_sh),
            Method::Sparse(_) => None,
        }
    }

    pub fn n_components(&self) -> Option<usize> {
        match self {
            Method::Sparse(c) => Some(c.n_components()),
            _ => None,
        }
    }

    /// Does all per-configuration precomputation and returns the generator.
    pub fn build<S: IsotropicSpectrum + 'static>(
        &self,
        grid: GridSpec,
        spectrum: S,
    ) -> Result<Box<dyn ScreenGenerator>> {
        Ok(match self {
            Method::Dft(cfg) => Box::new(DftGenerator::new(grid, spectrum, *cfg)?),
            Method::Pwd { n_sh } => Box::new(PwdGenerator::new(PwdConfig { grid, n_sh: *n_sh }, spectrum)?),
            Method::Sparse(cfg) => Box::new(SparseGenerator::new(cfg.clone(), spectrum, grid)?),
        })
    }
}
