use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::quadcore::{legendre_eval_with_derivative, Basis, Expansion};
use crate::Vec3;

use super::NearEvalConfig;

/// The root `z1` (upper half plane) of the complexified squared distance
/// `R^2(eta) = |x_bar - x(eta)|^2` closest to [-1, 1]; its conjugate is the
/// other member of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub z1: Complex64,
    /// `|R^2(z1)|` after the final Newton step.
    pub residual: f64,
    pub iterations: usize,
}

impl RootPair {
    /// Radius of the Bernstein ellipse through `z1`.
    pub fn bernstein_radius(&self) -> f64 {
        bernstein_radius(self.z1)
    }
}

pub(crate) fn bernstein_radius(z: Complex64) -> f64 {
    let w = z + ((z - 1.0).sqrt() * (z + 1.0).sqrt());
    let r = w.norm();
    r.max(1.0 / r)
}

/// `R^2(z)` and its derivative.
fn squared_distance(coeffs: &[Expansion; 3], x_bar: &Vec3, z: Complex64) -> (Complex64, Complex64) {
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for (c, e) in coeffs.iter().enumerate() {
        let (x, dx) = legendre_eval_with_derivative(&e.coeffs, z);
        let diff = Complex64::from(x_bar[c]) - x;
        value += diff * diff;
        deriv -= 2.0 * diff * dx;
    }
    (value, deriv)
}

fn newton(
    coeffs: &[Expansion; 3],
    x_bar: &Vec3,
    start: Complex64,
    cfg: &NearEvalConfig,
) -> Result<RootPair> {
    let mut z = start;
    let mut last_step = f64::INFINITY;
    for it in 1..=cfg.newton_max_iter {
        let (f, df) = squared_distance(coeffs, x_bar, z);
        if f == Complex64::new(0.0, 0.0) {
            return Ok(finish(z, 0.0, it));
        }
        let step = f / df;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        last_step = step.norm();
        if last_step <= cfg.newton_tol {
            let residual = squared_distance(coeffs, x_bar, z).0.norm();
            return Ok(finish(z, residual, it));
        }
    }
    Err(Error::RootNotFound {
        iterations: cfg.newton_max_iter,
        last_step,
    })
}

fn finish(z: Complex64, residual: f64, iterations: usize) -> RootPair {
    RootPair {
        z1: if z.im < 0.0 { z.conj() } else { z },
        residual,
        iterations,
    }
}

/// Starting guess from the panel chord: `eta0 + i 2d/h`, where `eta0` is the
/// chord coordinate of the projection of `x_bar`, `d` its distance to the
/// chord and `h` the chord length. Exact for straight panels.
pub fn chord_guess(coeffs: &[Expansion; 3], x_bar: &Vec3) -> Complex64 {
    let end = |eta: f64| Vec3::new(coeffs[0].eval(eta), coeffs[1].eval(eta), coeffs[2].eval(eta));
    let (a, b) = (end(-1.0), end(1.0));
    let chord = b - a;
    let h2 = chord.norm_squared();
    let t = (x_bar - a).dot(&chord) / h2;
    let d = (x_bar - (a + t * chord)).norm();
    let im = 2.0 * d / h2.sqrt();
    Complex64::new(2.0 * t - 1.0, if im > 0.0 { im } else { 1e-3 })
}

/// Guess from the nearest of a set of sample points on the panel.
fn nearest_sample_guess(coeffs: &[Expansion; 3], x_bar: &Vec3) -> Complex64 {
    const SAMPLES: usize = 33;
    let mut best = (f64::INFINITY, 0.0, 1.0);
    for j in 0..SAMPLES {
        let eta = -(std::f64::consts::PI * j as f64 / (SAMPLES - 1) as f64).cos();
        let mut r = Vec3::zeros();
        let mut speed = Vec3::zeros();
        for c in 0..3 {
            let (x, dx) = legendre_eval_with_derivative(&coeffs[c].coeffs, eta);
            r[c] = x_bar[c] - x;
            speed[c] = dx;
        }
        let d = r.norm();
        if d < best.0 {
            best = (d, eta, speed.norm());
        }
    }
    let (d, eta, speed) = best;
    Complex64::new(eta, (d / speed).max(1e-3))
}

/// Drops trailing coefficients at rounding level. They carry no information
/// on [-1, 1] but grow like |z|^k away from it.
fn chop_tail(mut e: Expansion) -> Expansion {
    let scale: f64 = e.coeffs.iter().map(|c| c.abs()).sum();
    let floor = 8.0 * f64::EPSILON * scale;
    while e.coeffs.len() > 1 && e.coeffs.last().is_some_and(|c| c.abs() <= floor) {
        e.coeffs.pop();
    }
    e
}

/// Newton iteration on `R^2(eta)` built from the panel's Legendre expansions
/// of the centerline coordinates.
///
/// Two starts are tried, the chord guess and the nearest sampled point;
/// of the converged roots the one with the smallest Bernstein radius wins.
pub fn find_root(
    panel_coeffs: &[Expansion; 3],
    x_bar: &Vec3,
    cfg: &NearEvalConfig,
) -> Result<RootPair> {
    if panel_coeffs.iter().any(|e| e.basis != Basis::Legendre) {
        return invalid("root finding expects Legendre expansions");
    }
    let trimmed = panel_coeffs.clone().map(chop_tail);
    let coeffs = &trimmed;
    let first = newton(coeffs, x_bar, chord_guess(coeffs, x_bar), cfg);
    let second = newton(coeffs, x_bar, nearest_sample_guess(coeffs, x_bar), cfg);
    match (first, second) {
        (Ok(a), Ok(b)) => Ok(if b.bernstein_radius() < a.bernstein_radius() { b } else { a }),
        (Ok(a), Err(_)) | (Err(_), Ok(a)) => Ok(a),
        (Err(e), Err(_)) => Err(e),
    }
}
