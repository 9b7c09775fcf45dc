//! Reference computations used to validate the production quadratures.
//!
//! Nothing here calls into the panel quadrature except
//! [`convergence_study`], which by design compares the production operator
//! against itself on a finer grid. The adaptive integrator is a plain
//! Gauss-Kronrod (7, 15) scheme with global bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::finitepart::{apply_k, build_weight_table, LineDensity};
use crate::geometry::{discretize, FiberCurve};
use crate::quadcore::{gauss_legendre, interpolate_to_uniform};
use crate::Vec3;

/// Maximum bisection depth of a single subinterval.
pub const MAX_DEPTH: u32 = 50;
const MAX_INTERVALS: usize = 50_000;
/// Distance from the split point inside which an integrand is replaced by
/// its one-sided limit.
pub const LIMIT_PATCH: f64 = 1e-14;

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

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    /// Estimated absolute error, maximum over components.
    pub error: f64,
    pub intervals: usize,
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    depth: u32,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<const N: usize>(f: &impl Fn(f64) -> [f64; N], a: f64, b: f64, depth: u32) -> Piece<N> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = [0.0; N];
    let mut kron = [0.0; N];
    let mut samples = [[0.0; N]; 15];
    for c in 0..N {
        gauss[c] = WG[3] * fc[c];
        kron[c] = WGK[7] * fc[c];
    }
    samples[14] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(center - dx), f(center + dx));
        for c in 0..N {
            let pair = lo[c] + hi[c];
            kron[c] += WGK[j] * pair;
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * pair;
            }
        }
        samples[2 * j] = lo;
        samples[2 * j + 1] = hi;
    }
    let mut error = 0.0f64;
    let mut value = [0.0; N];
    for c in 0..N {
        let mean = 0.5 * kron[c];
        let mut asc = WGK[7] * (fc[c] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((samples[2 * j][c] - mean).abs() + (samples[2 * j + 1][c] - mean).abs());
        }
        let resasc = asc * half.abs();
        let mut err = ((kron[c] - gauss[c]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        error = error.max(err);
        value[c] = kron[c] * half;
    }
    if value.iter().any(|v| !v.is_finite()) {
        error = f64::INFINITY;
    }
    Piece { a, b, depth, value, error }
}

/// Globally adaptive integration of a vector integrand over the union of
/// the intervals between consecutive `breakpoints`.
///
/// Stops when the summed error estimate is at most `tol * max(1, |I|)`,
/// with `|I|` the largest component. Fails with the best estimate attached
/// when a subinterval would exceed [`MAX_DEPTH`] or the interval budget is
/// exhausted.
pub fn adaptive_integrate_split<const N: usize>(
    f: impl Fn(f64) -> [f64; N],
    breakpoints: &[f64],
    tol: f64,
) -> Result<Integral<N>> {
    if breakpoints.len() < 2 {
        return invalid("need at least two breakpoints");
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    if breakpoints.iter().any(|x| !x.is_finite()) || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid(format!("breakpoints must be finite and increasing: {breakpoints:?}"));
    }
    let mut heap: BinaryHeap<Piece<N>> = breakpoints
        .windows(2)
        .map(|w| kronrod(&f, w[0], w[1], 0))
        .collect();
    loop {
        let mut value = [0.0; N];
        let mut error = 0.0;
        for p in heap.iter() {
            for c in 0..N {
                value[c] += p.value[c];
            }
            error += p.error;
        }
        let magnitude = value.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if error <= tol * magnitude.max(1.0) && magnitude.is_finite() {
            return Ok(Integral { value, error, intervals: heap.len() });
        }
        let worst = heap.pop().expect("heap is never empty");
        let fail = || Error::AccuracyFailure {
            estimate: value.to_vec(),
            error,
        };
        if worst.depth >= MAX_DEPTH || heap.len() + 2 > MAX_INTERVALS || !error.is_finite() {
            return Err(fail());
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            return Err(fail());
        }
        heap.push(kronrod(&f, worst.a, mid, worst.depth + 1));
        heap.push(kronrod(&f, mid, worst.b, worst.depth + 1));
    }
}

/// Adaptive integration of a scalar function over `[a, b]`.
pub fn adaptive_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    Ok(adaptive_integrate_split(|x| [f(x)], &[a, b], tol)?.value[0])
}

fn check_target(length: f64, s_bar: f64) -> Result<()> {
    if !(length > 0.0) {
        return invalid(format!("length must be positive, got {length}"));
    }
    if !(s_bar > 0.0 && s_bar < length) {
        return Err(Error::OutOfRange {
            value: s_bar,
            lower: 0.0,
            upper: length,
        });
    }
    Ok(())
}

/// `int_0^L (f(s) - f(s_bar)) / |s - s_bar| ds`, split at `s_bar`.
pub fn reference_l(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    length: f64,
    s_bar: f64,
    tol: f64,
) -> Result<f64> {
    check_target(length, s_bar)?;
    let (f_bar, slope) = (f(s_bar), df(s_bar));
    let integrand = |s: f64| {
        let h = s - s_bar;
        if h.abs() < LIMIT_PATCH {
            [slope * h.signum()]
        } else {
            [(f(s) - f_bar) / h.abs()]
        }
    };
    Ok(adaptive_integrate_split(integrand, &[0.0, s_bar, length], tol)?.value[0])
}

/// `K[f](s_bar)` from the original kernel
/// `[(I + RR/|R|^2) f(s) / |R| - (I + ss) f(s_bar) / |s - s_bar|]`, split at
/// `s_bar`.
pub fn reference_k(
    curve: &FiberCurve,
    f: impl Fn(f64) -> Vec3,
    df: impl Fn(f64) -> Vec3,
    s_bar: f64,
    tol: f64,
) -> Result<Vec3> {
    check_target(curve.length(), s_bar)?;
    let t = curve.tangent(s_bar);
    let kappa = curve.second_derivative(s_bar);
    let f_bar = f(s_bar);
    let local = f_bar + t * t.dot(&f_bar);
    let df_bar = df(s_bar);
    // one-sided limits of the integrand are +-g(s_bar, s_bar)
    let limit = (t * kappa.dot(&f_bar) + kappa * t.dot(&f_bar)) * 0.5 + df_bar + t * t.dot(&df_bar);
    let integrand = |s: f64| {
        let h = s - s_bar;
        let v = if h.abs() < LIMIT_PATCH {
            limit * h.signum()
        } else {
            let r = curve.chord(s, s_bar);
            let d = r.norm();
            let fs = f(s);
            (fs + r * (r.dot(&fs) / (d * d))) / d - local / h.abs()
        };
        [v[0], v[1], v[2]]
    };
    let out = adaptive_integrate_split(integrand, &[0.0, s_bar, curve.length()], tol)?;
    Ok(Vec3::from(out.value))
}

/// Arclength parameters of the local minima of `|x_bar - x(s)|`, located by
/// dense sampling and refined by golden-section search.
pub fn closest_points(curve: &FiberCurve, x_bar: &Vec3) -> Vec<f64> {
    const SAMPLES: usize = 4000;
    let length = curve.length();
    let h = length / SAMPLES as f64;
    let dist = |s: f64| (x_bar - curve.position(s)).norm_squared();
    let d: Vec<f64> = (0..=SAMPLES).map(|i| dist(i as f64 * h)).collect();
    let mut out = Vec::new();
    for i in 0..=SAMPLES {
        let left = i == 0 || d[i] < d[i - 1];
        let right = i == SAMPLES || d[i] <= d[i + 1];
        if !(left && right) {
            continue;
        }
        let (mut a, mut b) = ((i as f64 - 1.0).max(0.0) * h, ((i + 1) as f64 * h).min(length));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - phi * (b - a);
        let mut e = a + phi * (b - a);
        let (mut fc, mut fe) = (dist(c), dist(e));
        for _ in 0..80 {
            if fc < fe {
                b = e;
                e = c;
                fe = fc;
                c = b - phi * (b - a);
                fc = dist(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + phi * (b - a);
                fe = dist(e);
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Stokeslet line integral
/// `int_0^L f(s)/|R| + (R . f(s)) R / |R|^3 ds`, `R = x_bar - x(s)`, with the
/// interval split at every local distance minimum.
pub fn reference_s(curve: &FiberCurve, f: impl Fn(f64) -> Vec3, x_bar: &Vec3, tol: f64) -> Result<Vec3> {
    let length = curve.length();
    let mut breaks = vec![0.0, length];
    for s in closest_points(curve, x_bar) {
        if (x_bar - curve.position(s)).norm() == 0.0 {
            return Err(Error::DivisionByZero { distance: 0.0 });
        }
        breaks.push(s);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * length);
    let integrand = |s: f64| {
        let r = x_bar - curve.position(s);
        let d = r.norm();
        let fs = f(s);
        let v = fs / d + r * (r.dot(&fs) / (d * d * d));
        [v[0], v[1], v[2]]
    };
    let out = adaptive_integrate_split(integrand, &breaks, tol)?;
    Ok(Vec3::from(out.value))
}

/// `int_{-1}^{1} eta^k / |eta - z|^p d eta` for `k < count`, split at the
/// real part of `z` and one imaginary part to either side.
pub fn reference_moments(z: Complex64, p: u32, count: usize, tol: f64) -> Result<Vec<f64>> {
    if !(z.im > 0.0) {
        return invalid(format!("root must lie in the upper half plane, got {z}"));
    }
    let mut breaks = vec![-1.0, 1.0];
    for x in [z.re - z.im, z.re, z.re + z.im] {
        if x > -1.0 && x < 1.0 {
            breaks.push(x);
        }
    }
    breaks.sort_by(f64::total_cmp);
    (0..count)
        .map(|k| {
            let integrand = |eta: f64| [eta.powi(k as i32) / (eta - z).norm().powi(p as i32)];
            Ok(adaptive_integrate_split(integrand, &breaks, tol)?.value[0])
        })
        .collect()
}

/// `int_{-1}^{1} |eta^k| / |eta - z|^p d eta`, the scale against which the
/// moment errors are measured.
pub fn reference_moment_scales(z: Complex64, p: u32, count: usize, tol: f64) -> Result<Vec<f64>> {
    let mut breaks = vec![-1.0, 0.0, 1.0];
    if z.re > -1.0 && z.re < 1.0 && z.re != 0.0 {
        breaks.push(z.re);
    }
    breaks.sort_by(f64::total_cmp);
    (0..count)
        .map(|k| {
            let integrand = |eta: f64| [eta.abs().powi(k as i32) / (eta - z).norm().powi(p as i32)];
            Ok(adaptive_integrate_split(integrand, &breaks, tol)?.value[0])
        })
        .collect()
}

/// Eigenvalue of `L` on shifted Legendre polynomials:
/// `lambda_n = 2 (1 + 1/2 + ... + 1/n)`.
pub fn legendre_eigenvalue(n: usize) -> f64 {
    (1..=n).map(|j| 2.0 / j as f64).sum()
}

/// `P_n(-1 + 2s/L)` by the three-term recurrence.
pub fn shifted_legendre(n: usize, s: f64, length: f64) -> f64 {
    let x = 2.0 * s / length - 1.0;
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `L[sum_n alpha_n P~_n](s) = -sum_n alpha_n lambda_n P~_n(s)`.
pub fn diagonal_l(alpha: &[f64], s: f64, length: f64) -> f64 {
    alpha
        .iter()
        .enumerate()
        .map(|(n, a)| -a * legendre_eigenvalue(n) * shifted_legendre(n, s, length))
        .sum()
}

/// Uniform-grid error of `K` on `M` panels against a fine reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorGrid {
    /// `N_u`; the grid is `s_l = l L / N_u`, `l = 0..=N_u`.
    pub uniform_count: usize,
    pub reference_panels: usize,
    /// `(M, e_M)` in the order requested.
    pub errors: Vec<(usize, f64)>,
}

impl ErrorGrid {
    pub fn error_for(&self, panels: usize) -> Option<f64> {
        self.errors.iter().find(|(m, _)| *m == panels).map(|(_, e)| *e)
    }
}

fn k_on_uniform(
    curve: &FiberCurve,
    f: &(impl Fn(f64) -> Vec3 + Sync),
    rule_order: usize,
    panels: usize,
    targets: &[f64],
) -> Result<Vec<Vec3>> {
    let rule = gauss_legendre(rule_order)?;
    let table = build_weight_table(&rule)?;
    let disc = discretize(curve, panels, &rule)?;
    let density = LineDensity::sample(&disc.grid, f);
    let k = apply_k(&disc, &density, &table)?;
    let mut out = vec![Vec3::zeros(); targets.len()];
    for c in 0..3 {
        let comp: Vec<f64> = k.iter().map(|v| v[c]).collect();
        for (o, v) in out.iter_mut().zip(interpolate_to_uniform(&comp, &disc.grid, targets)?) {
            o[c] = v;
        }
    }
    Ok(out)
}

/// `e_M = max_l |K^M(s_l) - K^ref(s_l)|_2` with both operators interpolated
/// to the uniform grid from their panel nodes.
pub fn convergence_study(
    curve: &FiberCurve,
    f: impl Fn(f64) -> Vec3 + Sync,
    panel_counts: &[usize],
    reference_panels: usize,
    uniform_count: usize,
    rule_order: usize,
) -> Result<ErrorGrid> {
    if uniform_count == 0 {
        return invalid("uniform grid needs at least one interval");
    }
    if let Some(&m) = panel_counts.iter().find(|&&m| m > reference_panels || m == 0) {
        return invalid(format!(
            "panel count {m} must lie in 1..={reference_panels}"
        ));
    }
    let length = curve.length();
    let targets: Vec<f64> = (0..=uniform_count)
        .map(|l| l as f64 * length / uniform_count as f64)
        .collect();
    let reference = k_on_uniform(curve, &f, rule_order, reference_panels, &targets)?;
    let errors = panel_counts
        .par_iter()
        .map(|&m| {
            let k = k_on_uniform(curve, &f, rule_order, m, &targets)?;
            let e = k
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            Ok((m, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorGrid {
        uniform_count,
        reference_panels,
        errors,
    })
}
