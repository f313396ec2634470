//! Finite sums of plane waves `ψ(x, y) = Σ_t a_t exp(i(p_t x + q_t y))`.
//!
//! On a grid the sum factorizes: with `X[j, t] = exp(i p_t x_j)` and
//! `Y[l, t] = a_t exp(i q_t y_l)` the screen is `Y · Xᵀ`, one complex matrix
//! product instead of a triple loop of exponentials.

use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;

use crate::grid::GridSpec;

/// Rows between exact re-evaluations of the phase table recurrence.
const ANCHOR: usize = 32;

/// `n × T` table of `exp(i k_t · j·dx)`.
///
/// Consecutive rows are related by a fixed rotation, so most rows cost one
/// complex multiply per column; every `ANCHOR`-th row is recomputed exactly to
/// keep the accumulated rounding below `1e-14`.
pub(crate) fn phase_table(k: &[f64], n: usize, dx: f64) -> Array2<Complex64> {
    let mut table = Array2::<Complex64>::zeros((n, k.len()));
    let step: Vec<Complex64> = k.iter().map(|&k| Complex64::cis(k * dx)).collect();
    for j in 0..n {
        if j % ANCHOR == 0 {
            let x = j as f64 * dx;
            for (z, &k) in table.row_mut(j).iter_mut().zip(k) {
                *z = Complex64::cis(k * x);
            }
        } else {
            let (done, mut rest) = table.view_mut().split_at(Axis(0), j);
            let prev = done.row(j - 1);
            Zip::from(rest.row_mut(0)).and(&prev).and(&step[..]).for_each(|z, &p, &w| *z = p * w);
        }
    }
    table
}

/// Evaluates the plane-wave sum at every node of `grid`; `values[[l, j]]`
/// is the sum at `(x_j, y_l)`.
pub fn plane_wave_grid(p: &[f64], q: &[f64], amplitudes: &[Complex64], grid: &GridSpec) -> Array2<Complex64> {
    assert!(p.len() == q.len() && q.len() == amplitudes.len());
    if amplitudes.is_empty() {
        return Array2::zeros((grid.ny, grid.nx));
    }
    let dx = grid.dx();
    let x = phase_table(p, grid.nx, dx);
    let mut y = phase_table(q, grid.ny, dx);
    for mut row in y.rows_mut() {
        Zip::from(&mut row).and(amplitudes).for_each(|z, &a| *z *= a);
    }
    y.dot(&x.t())
}

/// Evaluates the plane-wave sum at arbitrary points.
pub fn plane_wave_points(p: &[f64], q: &[f64], amplitudes: &[Complex64], points: &[(f64, f64)]) -> Vec<Complex64> {
    assert!(p.len() == q.len() && q.len() == amplitudes.len());
    points
        .iter()
        .map(|&(x, y)| p.iter().zip(q).zip(amplitudes).map(|((&p, &q), &a)| a * Complex64::cis(p * x + q * y)).sum())
        .collect()
}
