//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals live in a max-heap keyed by their error estimate; the worst one is
//! bisected until the summed error meets `max(rel_tol·|I|, abs_tol)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 200_000;

/// One 15-point Kronrod evaluation with its embedded Gauss error estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Tolerance { rel, abs: 0.0 }
    }
}

/// Integrates `f` over the union of consecutive panels `[breaks[i], breaks[i+1]]`.
///
/// `breaks` must be sorted ascending; empty panels are skipped.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tolerance) -> Result<f64> {
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 4);
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let (value, err) = gk15(&mut f, a, b);
        total += value;
        total_err += err;
        heap.push(Segment { a, b, value, err });
    }
    if !total.is_finite() {
        return Err(Error::Quadrature {
            lo: breaks[0],
            hi: breaks[breaks.len() - 1],
            estimate: total,
            error: total_err,
            intervals: heap.len(),
        });
    }
    loop {
        let goal = (tol.rel * total.abs()).max(tol.abs);
        if total.is_finite() && total_err <= goal {
            // Re-sum from segments to shed accumulated update round-off.
            return Ok(heap.iter().map(|s| s.value).sum());
        }
        if heap.len() >= MAX_INTERVALS || !total.is_finite() || !total_err.is_finite() {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
    }
    let err: f64 = heap.iter().map(|s| s.err).sum();
    let estimate: f64 = heap.iter().map(|s| s.value).sum();
    if estimate.is_finite() && err <= (tol.rel * estimate.abs()).max(tol.abs) {
        return Ok(estimate);
    }
    Err(Error::Quadrature { lo: breaks[0], hi: breaks[breaks.len() - 1], estimate, error: err, intervals: heap.len() })
}

/// Integrates `f(x, y)` over `[x0, x1] × [y0, y1]` as an iterated adaptive
/// integral. The inner tolerance is tighter than the outer one so inner
/// errors do not masquerade as roughness of the outer integrand.
pub fn integrate_rect<F: Fn(f64, f64) -> f64>(
    f: F,
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    rel_tol: f64,
) -> Result<f64> {
    if !(x1 > x0) || !(y1 > y0) {
        return Ok(0.0);
    }
    let inner_tol = Tolerance::relative(rel_tol * 1e-2);
    let mut failure = None;
    let outer = integrate(
        |x| match integrate(|y| f(x, y), &[y0, y1], inner_tol) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &[x0, x1],
        Tolerance::relative(rel_tol),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    outer
}

/// `n + 1` logarithmically spaced points from `lo` to `hi` (both `> 0`), with
/// exact endpoints.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    let mut v: Vec<f64> = (0..=n).map(|i| lo * (ratio * i as f64 / n as f64).exp()).collect();
    v[0] = lo;
    v[n] = hi;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_to_degree_22() {
        for deg in 0..=22 {
            let (v, _) = gk15(&mut |x: f64| x.powi(deg), 0.0, 1.0);
            let exact = 1.0 / (deg + 1) as f64;
            assert!((v - exact).abs() < 1e-15, "degree {deg}: {v} vs {exact}");
        }
    }

    #[test]
    fn gauss_rule_is_exact_to_degree_13() {
        // With an exact Gauss rule the embedded error estimate vanishes.
        for deg in 0..=13 {
            let (_, err) = gk15(&mut |x: f64| x.powi(deg), -1.0, 1.0);
            assert!(err < 1e-14, "degree {deg}: {err}");
        }
        let (_, err) = gk15(&mut |x: f64| x.powi(14), -1.0, 1.0);
        assert!(err > 1e-6);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x| x.powf(-0.5), &[0.0, 1.0], Tolerance::relative(1e-10)).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn oscillatory_integral() {
        let v = integrate(|x| x.sin(), &[0.0, 100.0], Tolerance::relative(1e-12)).unwrap();
        assert!((v - (1.0 - 100f64.cos())).abs() < 1e-11);
    }

    #[test]
    fn rectangle() {
        let v = integrate_rect(|x, y| x * y.exp(), (0.0, 2.0), (0.0, 1.0), 1e-10).unwrap();
        assert!((v - 2.0 * (1f64.exp() - 1.0)).abs() < 1e-10);
        assert_eq!(integrate_rect(|_, _| 1.0, (1.0, 1.0), (0.0, 1.0), 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn divergent_integral_reports_error() {
        let r = integrate(|x| 1.0 / x, &[0.0, 1.0], Tolerance::relative(1e-10));
        assert!(matches!(r, Err(Error::Quadrature { .. })), "{r:?}");
    }

    #[test]
    fn geomspace_endpoints() {
        let g = geomspace(0.63, 12566.0, 500);
        assert_eq!(g[0], 0.63);
        assert_eq!(g[500], 12566.0);
        assert!((g[250] / g[0] - (12566.0f64 / 0.63).sqrt()).abs() < 1e-9);
    }
}
