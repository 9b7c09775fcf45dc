//! Moments `q_k^p(z) = int_{-1}^{1} eta^k / |eta - z|^p d eta` for `p = 1, 3`.
//!
//! With `z = a + ib` and `Q(eta) = (eta - a)^2 + b^2` the moments obey
//!
//! ```text
//! k I_k = [eta^(k-1) sqrt(Q)] + (2k - 1) a I_(k-1) - (k - 1) |z|^2 I_(k-2)     (p = 1)
//! J_(k+1) = a J_k + k I_(k-1) - [eta^k / sqrt(Q)]                             (p = 3)
//! ```
//!
//! where `[.]` is the difference of the endpoint values at 1 and -1. The
//! homogeneous part of the `p = 1` recurrence grows like `|z|^k`, so upward
//! recursion is only used while that amplification stays small; beyond it the
//! moments are integrated numerically on a grid graded toward `Re z`.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::quadcore::{gauss_legendre, MAX_ORDER};

/// Largest `|z|^(count - 1)` for which upward recursion is trusted.
const MAX_AMPLIFICATION: f64 = 8.0;

/// `t + sqrt(t^2 + b^2)` without cancellation for negative `t`.
fn plus_hypot(t: f64, b: f64) -> f64 {
    let h = t.hypot(b);
    if t >= 0.0 {
        t + h
    } else {
        b * b / (h - t)
    }
}

/// `t / sqrt(t^2 + b^2) - sign(t)`, accurate for `|t| >> b`.
fn cosine_defect(t: f64, b: f64) -> f64 {
    let beta = (b / t) * (b / t);
    let root = (1.0 + beta).sqrt();
    -t.signum() * beta / (root * (1.0 + root))
}

/// `[(eta - a) / sqrt(Q)]` from -1 to 1, divided by `b^2`. This is `J_0`.
fn j0(a: f64, b: f64) -> f64 {
    let (u, v) = (1.0 - a, -1.0 - a);
    let diff = if u > 0.0 && v < 0.0 {
        u / u.hypot(b) - v / v.hypot(b)
    } else {
        // same sign: the leading +-1 terms cancel analytically
        cosine_defect(u, b) - cosine_defect(v, b)
    };
    diff / (b * b)
}

fn recursive_moments(z: Complex64, p: u32, count: usize) -> Vec<f64> {
    let (a, b) = (z.re, z.im);
    let z2 = z.norm_sqr();
    let r_plus = (1.0 - a).hypot(b);
    let r_minus = (1.0 + a).hypot(b);

    let mut one = Vec::with_capacity(count + 1);
    let needed = if p == 1 { count } else { count.saturating_sub(1) };
    if needed > 0 {
        one.push((plus_hypot(1.0 - a, b) / plus_hypot(-1.0 - a, b)).ln());
    }
    if needed > 1 {
        // r_plus - r_minus = -4a / (r_plus + r_minus)
        one.push(-4.0 * a / (r_plus + r_minus) + a * one[0]);
    }
    for k in 2..needed {
        let kf = k as f64;
        let odd = k % 2 == 1;
        // [eta^(k-1) sqrt(Q)] = r_plus - (-1)^(k-1) r_minus
        let boundary = if odd {
            -4.0 * a / (r_plus + r_minus)
        } else {
            r_plus + r_minus
        };
        let next = (boundary + (2.0 * kf - 1.0) * a * one[k - 1] - (kf - 1.0) * z2 * one[k - 2]) / kf;
        one.push(next);
    }
    if p == 1 {
        return one;
    }

    let mut three = Vec::with_capacity(count);
    if count > 0 {
        three.push(j0(a, b));
    }
    if count > 1 {
        // [1 / sqrt(Q)] = (r_minus - r_plus) / (r_plus r_minus)
        let boundary = 4.0 * a / ((r_plus + r_minus) * r_plus * r_minus);
        three.push(a * three[0] - boundary);
    }
    for k in 1..count.saturating_sub(1) {
        // [eta^k / sqrt(Q)] = 1/r_plus - (-1)^k / r_minus
        let boundary = if k % 2 == 0 {
            4.0 * a / ((r_plus + r_minus) * r_plus * r_minus)
        } else {
            1.0 / r_plus + 1.0 / r_minus
        };
        let next = a * three[k] + k as f64 * one[k - 1] - boundary;
        three.push(next);
    }
    three
}

/// Composite Gauss-Legendre on pieces graded geometrically toward the
/// projection of `z` onto [-1, 1].
fn graded_moments(z: Complex64, p: u32, count: usize) -> Vec<f64> {
    let rule = gauss_legendre(32).expect("order 32 is supported");
    let (a, b) = (z.re, z.im);
    let centre = a.clamp(-1.0, 1.0);
    let offset = (a - centre).abs();
    let mut breaks = vec![centre];
    for dir in [-1.0f64, 1.0] {
        let end = dir;
        let span = (end - centre).abs();
        if span == 0.0 {
            continue;
        }
        let mut step = b.hypot(offset).min(span);
        let mut t = 0.0;
        while t + step < span {
            t += step;
            breaks.push(centre + dir * t);
            step = t.max(step);
        }
        breaks.push(end);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut out = vec![0.0; count];
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (&x, &wt) in rule.nodes().iter().zip(rule.weights()) {
            let eta = mid + half * x;
            let q = (eta - a) * (eta - a) + b * b;
            let kernel = wt * half / if p == 1 { q.sqrt() } else { q * q.sqrt() };
            let mut power = 1.0;
            for o in out.iter_mut() {
                *o += kernel * power;
                power *= eta;
            }
        }
    }
    out
}

/// `q_k^p(z1)` for `k = 0..count`.
pub fn qkp_moments(z1: Complex64, p: u32, count: usize) -> Result<Vec<f64>> {
    if !(z1.im > 0.0) || !z1.re.is_finite() || !z1.im.is_finite() {
        return invalid(format!("root {z1} must lie in the upper half plane"));
    }
    if p != 1 && p != 3 {
        return invalid(format!("only p = 1 and p = 3 are supported, got {p}"));
    }
    if count > MAX_ORDER {
        return invalid(format!("at most {MAX_ORDER} moments, got {count}"));
    }
    let amplification = z1.norm().max(1.0).powi(count.saturating_sub(1) as i32);
    if amplification <= MAX_AMPLIFICATION {
        Ok(recursive_moments(z1, p, count))
    } else {
        Ok(graded_moments(z1, p, count))
    }
}
