//! Isotropic phase spectra and the quantities every generator is judged
//! against: band-integrated power and the target structure function.
//!
//! Units are fixed throughout the crate: lengths in metres, wavenumbers in
//! rad/m, phase in radians, spectral density in m² per (rad/m)².

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad::{self, geomspace, Tolerance};
use crate::special::one_minus_j0;

/// A pluggable isotropic spectral density `Φ(k)`.
///
/// Implementations must be pure and cheap to share across threads.
pub trait IsotropicSpectrum: Send + Sync {
    /// `Φ(k)` for `k ≥ 0`. May return `+∞` at `k = 0` for spectra without an
    /// outer scale.
    fn density(&self, k: f64) -> f64;

    /// `Φ(√(p² + q²))`.
    fn density_xy(&self, p: f64, q: f64) -> f64 {
        self.density((p * p + q * q).sqrt())
    }

    /// Wavenumber beyond which `Φ` is negligible for integration purposes.
    fn support_max(&self) -> f64;

    /// Characteristic wavenumbers where the integrand changes character.
    /// Used only to place quadrature breakpoints.
    fn scales(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Whether `Φ` diverges as `k → 0`.
    fn singular_at_origin(&self) -> bool {
        false
    }
}

impl<S: IsotropicSpectrum + ?Sized> IsotropicSpectrum for &S {
    fn density(&self, k: f64) -> f64 {
        (**self).density(k)
    }
    fn density_xy(&self, p: f64, q: f64) -> f64 {
        (**self).density_xy(p, q)
    }
    fn support_max(&self) -> f64 {
        (**self).support_max()
    }
    fn scales(&self) -> Vec<f64> {
        (**self).scales()
    }
    fn singular_at_origin(&self) -> bool {
        (**self).singular_at_origin()
    }
}

impl<S: IsotropicSpectrum + ?Sized> IsotropicSpectrum for std::sync::Arc<S> {
    fn density(&self, k: f64) -> f64 {
        (**self).density(k)
    }
    fn density_xy(&self, p: f64, q: f64) -> f64 {
        (**self).density_xy(p, q)
    }
    fn support_max(&self) -> f64 {
        (**self).support_max()
    }
    fn scales(&self) -> Vec<f64> {
        (**self).scales()
    }
    fn singular_at_origin(&self) -> bool {
        (**self).singular_at_origin()
    }
}

/// Von Kármán model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumParams {
    /// Power-law exponent, `1 < alpha < 2` (5/3 for Kolmogorov).
    pub alpha: f64,
    /// Coherence radius `r_C` in metres.
    pub coherence_radius: f64,
    /// Outer scale `L0` in metres; `f64::INFINITY` for none.
    pub outer_scale: f64,
    /// Inner scale `l0` in metres.
    pub inner_scale: f64,
}

impl SpectrumParams {
    /// The reference configuration used throughout the docs and tests:
    /// α = 5/3, r_C = 1 m, L0 = 10 m, l0 = 1 mm.
    pub fn reference() -> Self {
        SpectrumParams { alpha: 5.0 / 3.0, coherence_radius: 1.0, outer_scale: 10.0, inner_scale: 1e-3 }
    }

    /// Builds parameters directly from the wavenumber scales `κ0 = 2π/L0` and
    /// `κm = 2π/l0`; `kappa0 = 0` means no outer scale.
    pub fn from_wavenumbers(alpha: f64, coherence_radius: f64, kappa0: f64, kappa_m: f64) -> Self {
        SpectrumParams {
            alpha,
            coherence_radius,
            outer_scale: if kappa0 == 0.0 { f64::INFINITY } else { 2.0 * PI / kappa0 },
            inner_scale: 2.0 * PI / kappa_m,
        }
    }

    /// `κ0 = 2π/L0`, zero for an infinite outer scale.
    pub fn kappa0(&self) -> f64 {
        if self.outer_scale.is_infinite() {
            0.0
        } else {
            2.0 * PI / self.outer_scale
        }
    }

    /// `κm = 2π/l0`.
    pub fn kappa_m(&self) -> f64 {
        2.0 * PI / self.inner_scale
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(Error::domain(format!("alpha = {} outside (1, 2)", self.alpha)));
        }
        if !(self.coherence_radius > 0.0 && self.coherence_radius.is_finite()) {
            return Err(Error::argument("coherence radius must be positive"));
        }
        if !(self.inner_scale > 0.0 && self.inner_scale.is_finite()) {
            return Err(Error::argument("inner scale must be positive"));
        }
        if !(self.outer_scale > 0.0) {
            return Err(Error::argument("outer scale must be positive or infinite"));
        }
        if !(self.kappa0() < self.kappa_m()) {
            return Err(Error::argument("outer scale must exceed inner scale"));
        }
        Ok(())
    }
}

/// Normalization `C(α) = α 2^(α−2) Γ(1+α/2) / (π Γ(1−α/2))`, chosen so the
/// Kolmogorov limit of the structure function is exactly `(r/r_C)^α`.
pub fn normalization_c(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha = {alpha} outside (1, 2)")));
    }
    Ok(alpha * 2f64.powf(alpha - 2.0) * gamma(1.0 + alpha / 2.0) / (PI * gamma(1.0 - alpha / 2.0)))
}

/// The von Kármán spectrum
/// `Φ(k) = C(α) r_C^(−α) (k² + κ0²)^(−1−α/2) exp(−k²/κm²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonKarman {
    params: SpectrumParams,
    prefactor: f64,
    kappa0_sq: f64,
    inv_kappa_m_sq: f64,
    exponent: f64,
}

impl VonKarman {
    pub fn new(params: SpectrumParams) -> Result<Self> {
        params.validate()?;
        let prefactor = normalization_c(params.alpha)? * params.coherence_radius.powf(-params.alpha);
        let kappa0 = params.kappa0();
        let kappa_m = params.kappa_m();
        Ok(VonKarman {
            params,
            prefactor,
            kappa0_sq: kappa0 * kappa0,
            inv_kappa_m_sq: 1.0 / (kappa_m * kappa_m),
            exponent: -1.0 - params.alpha / 2.0,
        })
    }

    pub fn params(&self) -> &SpectrumParams {
        &self.params
    }

    /// Checked evaluation: rejects negative `k` and the `k = 0` singularity.
    pub fn psd(&self, k: f64) -> Result<f64> {
        if !(k >= 0.0) {
            return Err(Error::domain(format!("negative wavenumber {k}")));
        }
        if k == 0.0 && self.kappa0_sq == 0.0 {
            return Err(Error::Singularity { k });
        }
        Ok(self.density(k))
    }

    #[inline]
    fn eval_sq(&self, k_sq: f64) -> f64 {
        self.prefactor * (k_sq + self.kappa0_sq).powf(self.exponent) * (-k_sq * self.inv_kappa_m_sq).exp()
    }
}

impl IsotropicSpectrum for VonKarman {
    #[inline]
    fn density(&self, k: f64) -> f64 {
        self.eval_sq(k * k)
    }

    fn support_max(&self) -> f64 {
        20.0 * self.params.kappa_m()
    }

    fn scales(&self) -> Vec<f64> {
        let mut s = vec![self.params.kappa_m()];
        if self.kappa0_sq > 0.0 {
            s.insert(0, self.params.kappa0());
        }
        s
    }

    fn singular_at_origin(&self) -> bool {
        self.kappa0_sq == 0.0
    }
}

/// Checked free-function form of the von Kármán density.
pub fn von_karman_psd(k: f64, params: &SpectrumParams) -> Result<f64> {
    VonKarman::new(*params)?.psd(k)
}

const BAND_TOL: f64 = 1e-9;
const SF_TOL: f64 = 1e-8;
/// Log-panels per factor of two in wavenumber.
const PANELS_PER_OCTAVE: f64 = 1.0;

/// Radial breakpoints spanning `[lo, hi]` (`lo > 0`): the spectrum's
/// characteristic scales plus log-spaced points.
fn log_breaks(spectrum: &dyn IsotropicSpectrum, lo: f64, hi: f64) -> Vec<f64> {
    let octaves = ((hi / lo).log2() * PANELS_PER_OCTAVE).ceil().max(1.0) as usize;
    let mut b = geomspace(lo, hi, octaves);
    b.extend(spectrum.scales().into_iter().filter(|&s| s > lo && s < hi));
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Lowest wavenumber resolved by quadrature; below it the integrand is
/// replaced by its local power-law form.
fn floor_wavenumber(spectrum: &dyn IsotropicSpectrum, hi: f64) -> f64 {
    let smallest_scale = spectrum.scales().into_iter().filter(|s| *s > 0.0).fold(hi, f64::min);
    smallest_scale * 1e-6
}

/// Band power `2π ∫_{lo}^{hi} k Φ(k) dk`: the phase variance carried by the
/// annulus `lo ≤ |κ| ≤ hi`.
pub fn band_power(lo: f64, hi: f64, spectrum: &dyn IsotropicSpectrum) -> Result<f64> {
    if !(lo >= 0.0) || !(hi >= lo) {
        return Err(Error::argument(format!("invalid band [{lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(0.0);
    }
    if lo == 0.0 && spectrum.singular_at_origin() {
        return Err(Error::Singularity { k: 0.0 });
    }
    let start = if lo > 0.0 { lo } else { floor_wavenumber(spectrum, hi).min(hi) };
    let mut breaks = log_breaks(spectrum, start, hi);
    if lo == 0.0 {
        breaks.insert(0, 0.0);
    }
    let integral = quad::integrate(|k| k * spectrum.density(k), &breaks, Tolerance::relative(BAND_TOL))?;
    Ok(2.0 * PI * integral)
}

/// Target structure function
/// `D(r) = 2 ∬ Φ(κ)(1 − cos κ·r) d²κ = 4π ∫ k Φ(k) (1 − J0(kr)) dk`.
///
/// The radial integral is split into three parts:
/// * below `k_floor` the integrand is replaced by its small-argument form
///   `(kr)²/4 · A k^(−β)`, with `A, β` fitted locally, and integrated exactly;
/// * up to a cutoff `K` it is integrated on log-spaced panels, refined to
///   half-period panels once `kr` is large;
/// * above `K` only the non-oscillatory `k Φ(k)` term is kept. `K` grows
///   until the neglected Bessel tail, bounded by its envelope, is below
///   the tolerance.
pub fn target_structure_function(r: f64, spectrum: &dyn IsotropicSpectrum) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::argument(format!("separation {r} must be non-negative")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let top = spectrum.support_max();
    let k_floor = floor_wavenumber(spectrum, top).min(1e-6 / r);

    let low_tail = small_k_tail(spectrum, k_floor, r);

    let integrand = |k: f64| k * spectrum.density(k) * one_minus_j0(k * r);
    let tol = Tolerance::relative(SF_TOL * 1e-2);

    // Non-oscillatory region: kr ≤ OSC_START.
    const OSC_START: f64 = 20.0;
    let osc_from = (OSC_START / r).min(top);
    let mut total = low_tail;
    if osc_from > k_floor {
        total += quad::integrate(integrand, &log_breaks(spectrum, k_floor, osc_from), tol)?;
    }
    if osc_from >= top {
        return Ok(4.0 * PI * total);
    }

    // Oscillatory region, in chunks of half-periods.
    let half_period = PI / r;
    let mut k = osc_from;
    let mut chunk = 16usize;
    let cutoff = loop {
        let end = (k + chunk as f64 * half_period).min(top);
        let mut breaks: Vec<f64> = (0..=chunk).map(|i| k + i as f64 * half_period).filter(|&x| x < end).collect();
        breaks.push(end);
        breaks.extend(spectrum.scales().into_iter().filter(|&s| s > k && s < end));
        breaks.sort_by(f64::total_cmp);
        total += quad::integrate(integrand, &breaks, tol)?;
        k = end;
        if k >= top || bessel_tail_bound(spectrum, k, r) <= SF_TOL * 1e-2 * total.abs() {
            break k;
        }
        chunk = (chunk * 2).min(4096);
    };

    if cutoff < top {
        // Beyond the cutoff 1 − J0 averages to 1.
        total += quad::integrate(|k| k * spectrum.density(k), &log_breaks(spectrum, cutoff, top), tol)?;
    }
    Ok(4.0 * PI * total)
}

/// Envelope bound of `|∫_K^∞ k Φ(k) J0(kr) dk|`: the Bessel envelope
/// `√(2/(πkr))` times `k Φ(k)` at `K`, over one half period, doubled.
fn bessel_tail_bound(spectrum: &dyn IsotropicSpectrum, k: f64, r: f64) -> f64 {
    let envelope = k * spectrum.density(k) * (2.0 / (PI * k * r)).sqrt();
    2.0 * envelope * PI / r
}

/// `∫_0^{k_floor} k Φ(k) (1 − J0(kr)) dk` for `k_floor·r ≪ 1`, from a local
/// power-law fit `Φ ≈ A k^(−β)` on `[k_floor/2, k_floor]`.
fn small_k_tail(spectrum: &dyn IsotropicSpectrum, k_floor: f64, r: f64) -> f64 {
    let upper = spectrum.density(k_floor);
    let lower = spectrum.density(0.5 * k_floor);
    if !(upper > 0.0) || !lower.is_finite() {
        return 0.0;
    }
    let beta = (lower / upper).log2();
    // ∫_0^K A k^(3−β) r²/4 dk with A = Φ(K) K^β.
    upper * k_floor.powi(4) * r * r / (4.0 * (4.0 - beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> VonKarman {
        VonKarman::new(SpectrumParams::reference()).unwrap()
    }

    #[test]
    fn normalization_matches_gamma_oracle() {
        // 40-digit Gamma-function evaluations.
        assert!((normalization_c(5.0 / 3.0).unwrap() - 7.11571346845366048406e-02).abs() < 1e-14);
        assert!((normalization_c(1.5).unwrap() - 8.55835648452761693639e-02).abs() < 1e-14);
        assert!(normalization_c(1.5).unwrap() > normalization_c(5.0 / 3.0).unwrap());
    }

    #[test]
    fn normalization_near_one_is_finite_and_continuous() {
        let a = normalization_c(1.0 + 1e-9).unwrap();
        let b = normalization_c(1.0 + 2e-9).unwrap();
        assert!(a.is_finite() && a > 0.0);
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn normalization_rejects_out_of_range() {
        for a in [1.0, 2.0, 0.5, 2.5, f64::NAN] {
            assert!(matches!(normalization_c(a), Err(Error::Domain(_))), "alpha {a}");
        }
    }

    #[test]
    fn psd_at_kappa0() {
        let vk = reference();
        let p = vk.params();
        let k0 = p.kappa0();
        let direct = normalization_c(p.alpha).unwrap()
            * (2.0 * k0 * k0).powf(-11.0 / 6.0)
            * (-(k0 * k0) / (p.kappa_m() * p.kappa_m())).exp();
        let v = vk.psd(k0).unwrap();
        assert!((v / direct - 1.0).abs() < 1e-14);
        // Independent arbitrary-precision evaluation.
        assert!((v / 1.09733004772493522583e-01 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn psd_errors_and_cutoff() {
        let vk = reference();
        assert!(matches!(vk.psd(-1.0), Err(Error::Domain(_))));
        let inf = VonKarman::new(SpectrumParams { outer_scale: f64::INFINITY, ..SpectrumParams::reference() }).unwrap();
        assert!(matches!(inf.psd(0.0), Err(Error::Singularity { .. })));
        assert!(vk.psd(0.0).unwrap().is_finite());
        let km = vk.params().kappa_m();
        let pref = normalization_c(5.0 / 3.0).unwrap();
        assert!(vk.density(10.0 * km) < (-100f64).exp() * pref);
    }

    #[test]
    fn psd_strictly_decreasing() {
        let vk = reference();
        let ks = geomspace(1e-3, 5e4, 400);
        for w in ks.windows(2) {
            assert!(vk.density(w[1]) < vk.density(w[0]));
        }
    }

    #[test]
    fn cartesian_matches_radial_exactly() {
        let vk = reference();
        for (p, q) in [(1.0, 2.0), (-3.5, 0.25), (100.0, -7.0), (0.0, 0.0)] {
            assert_eq!(vk.density_xy(p, q), vk.density((p * p + q * q).sqrt()));
        }
    }

    #[test]
    fn band_power_basics() {
        let vk = reference();
        assert_eq!(band_power(3.0, 3.0, &vk).unwrap(), 0.0);
        assert!(matches!(band_power(2.0, 1.0, &vk), Err(Error::Argument(_))));
        let total = band_power(0.0, 2.0 * vk.params().kappa_m(), &vk).unwrap();
        // Arbitrary-precision quadrature of the same integral.
        assert!((total / 5.81990588735269986920e-01 - 1.0).abs() < 1e-9, "{total}");
    }

    #[test]
    fn band_power_is_additive() {
        let vk = reference();
        let (a, b, c, d) = (0.0, 0.9, 40.0, 12566.0);
        let whole = band_power(a, d, &vk).unwrap();
        let parts = band_power(a, b, &vk).unwrap() + band_power(b, c, &vk).unwrap() + band_power(c, d, &vk).unwrap();
        assert!((parts / whole - 1.0).abs() < 1e-8);
    }

    #[test]
    fn band_power_from_zero_diverges_without_outer_scale() {
        let inf = VonKarman::new(SpectrumParams { outer_scale: f64::INFINITY, ..SpectrumParams::reference() }).unwrap();
        assert!(matches!(band_power(0.0, 1.0, &inf), Err(Error::Singularity { .. })));
        assert!(band_power(0.1, 1.0, &inf).unwrap() > 0.0);
    }

    #[test]
    fn structure_function_at_zero_and_negative() {
        let vk = reference();
        assert_eq!(target_structure_function(0.0, &vk).unwrap(), 0.0);
        assert!(matches!(target_structure_function(-0.1, &vk), Err(Error::Argument(_))));
    }

    #[test]
    fn structure_function_is_monotone_up_to_outer_scale() {
        let vk = reference();
        let mut prev = 0.0;
        for i in 1..=100 {
            let r = 10.0 * i as f64 / 100.0;
            let d = target_structure_function(r, &vk).unwrap();
            assert!(d >= prev, "D({r}) = {d} < {prev}");
            prev = d;
        }
    }

    #[test]
    fn structure_function_saturates_at_twice_variance() {
        let vk = reference();
        let var = band_power(0.0, vk.support_max(), &vk).unwrap();
        let d = target_structure_function(2000.0, &vk).unwrap();
        assert!((d / (2.0 * var) - 1.0).abs() < 1e-3, "{d} vs {}", 2.0 * var);
    }

    #[test]
    fn structure_function_matches_independent_quadrature() {
        // QUADPACK with Cephes J0, half-period panels to 12 κm.
        let vk = reference();
        for (r, golden) in [(0.5, 0.14508678256364826), (0.1, 0.014658959040062904), (0.01, 0.0003941635340200206)] {
            let d = target_structure_function(r, &vk).unwrap();
            assert!((d / golden - 1.0).abs() < 1e-7, "D({r}) = {d:.15e}, golden {golden:.15e}");
        }
    }
}
