use std::f64::consts::PI;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A uniform Cartesian sampling grid.
///
/// Points sit at `x_j = j·Δx`, `y_l = l·Δx` with `Δx = L / N_x`. A grid with
/// `ny == 1` is a line of points along `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Physical side length along `x` in metres.
    pub side: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, side: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::argument("grid dimensions must be positive"));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::argument(format!("grid side {side} must be positive")));
        }
        Ok(GridSpec { nx, ny, side })
    }

    pub fn square(n: usize, side: f64) -> Result<Self> {
        Self::new(n, n, side)
    }

    /// Line of `n` points along `x` with spacing `side / n`.
    pub fn line(n: usize, side: f64) -> Result<Self> {
        Self::new(n, 1, side)
    }

    /// Spacing `Δx = L / N_x`.
    pub fn dx(&self) -> f64 {
        self.side / self.nx as f64
    }

    /// Frequency step `Δk = 2π / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.side
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn y(&self, l: usize) -> f64 {
        l as f64 * self.dx()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks the square, even-sided layout the FFT-based generators need.
    pub(crate) fn require_fft_layout(&self) -> Result<()> {
        if self.nx != self.ny {
            return Err(Error::argument(format!("DFT grids must be square, got {}x{}", self.nx, self.ny)));
        }
        if self.nx < 2 || self.nx % 2 != 0 {
            return Err(Error::argument(format!("DFT grid side must be even and >= 2, got {}", self.nx)));
        }
        Ok(())
    }
}

/// One complex phase sample `ψ`; its real and imaginary parts are two
/// statistically equivalent, uncorrelated real phase screens.
///
/// `values[[l, j]]` holds `ψ(x_j, y_l)`: rows run along `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexScreen {
    pub grid: GridSpec,
    pub values: Array2<Complex64>,
    pub sample_index: u64,
}

impl ComplexScreen {
    pub fn zeros(grid: GridSpec, sample_index: u64) -> Self {
        ComplexScreen { grid, values: Array2::zeros((grid.ny, grid.nx)), sample_index }
    }

    /// First real screen `φ1 = Re ψ`.
    pub fn real(&self) -> Array2<f64> {
        self.values.mapv(|c| c.re)
    }

    /// Second real screen `φ2 = Im ψ`.
    pub fn imag(&self) -> Array2<f64> {
        self.values.mapv(|c| c.im)
    }

    pub fn view(&self) -> ArrayView2<'_, Complex64> {
        self.values.view()
    }
}
