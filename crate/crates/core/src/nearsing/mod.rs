//! Stokeslet line integral
//!
//! ```text
//! S[f](x) = int_0^L f(s)/|x - x(s)| + ((x - x(s)) . f(s)) (x - x(s))/|x - x(s)|^3 ds
//! ```
//!
//! evaluated with the composite Gauss-Legendre rule far from the fiber and
//! with singularity-swapping product integration on panels close to the
//! evaluation point.

mod moments;
mod roots;

pub use moments::qkp_moments;
pub use roots::{chord_guess, find_root, RootPair};

use log::{debug, warn};

use crate::error::{invalid, Error, Result};
use crate::finitepart::LineDensity;
use crate::geometry::PanelizedCurve;
use crate::quadcore::solve_vandermonde_transpose;
use crate::Vec3;

/// Tuning of the near/far dispatch and of the root finder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearEvalConfig {
    /// Panels closer than `switch_factor` panel lengths get special
    /// quadrature.
    pub switch_factor: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl Default for NearEvalConfig {
    fn default() -> Self {
        Self {
            switch_factor: 1.0,
            newton_tol: 1e-13,
            newton_max_iter: 30,
        }
    }
}

impl NearEvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.switch_factor > 0.0) {
            return invalid(format!("switch factor must be positive, got {}", self.switch_factor));
        }
        Ok(())
    }
}

/// Roots with `Im z1` at or above this are not treated as near.
const NEAR_ROOT_IMAG: f64 = 1.0;

fn check_inputs(curve: &PanelizedCurve, f: &LineDensity) -> Result<()> {
    if f.samples.len() != curve.grid.node_count() {
        return invalid(format!(
            "density has {} samples, curve has {} nodes",
            f.samples.len(),
            curve.grid.node_count()
        ));
    }
    Ok(())
}

#[inline]
fn stokeslet(r: &Vec3, f: &Vec3) -> Result<Vec3> {
    let d2 = r.norm_squared();
    if d2 == 0.0 {
        return Err(Error::DivisionByZero { distance: 0.0 });
    }
    let d = d2.sqrt();
    Ok(f / d + r * (r.dot(f) / (d2 * d)))
}

/// Regular Gauss-Legendre contribution of panel `m`.
fn regular_panel(curve: &PanelizedCurve, f: &LineDensity, x_bar: &Vec3, m: usize) -> Result<Vec3> {
    let w = curve.grid.rule().weights();
    let mut sum = Vec3::zeros();
    for (i, &wl) in curve.grid.panel_range(m).zip(w) {
        sum += wl * stokeslet(&(x_bar - curve.positions[i]), &f.samples[i])?;
    }
    Ok(sum * (0.5 * curve.grid.panel_width()))
}

/// Composite Gauss-Legendre quadrature over all panels.
pub fn eval_s_regular(curve: &PanelizedCurve, f: &LineDensity, x_bar: &Vec3) -> Result<Vec3> {
    check_inputs(curve, f)?;
    let mut total = Vec3::zeros();
    for m in 0..curve.grid.panel_count() {
        total += regular_panel(curve, f, x_bar, m)?;
    }
    Ok(total)
}

/// Special quadrature for panel `m`: the node samples of
/// `g_p (omega / R^2)^(p/2)` with `omega(eta) = |eta - z1|^2` are integrated
/// against `|eta - z1|^-p` through weights from the moment system.
///
/// At real nodes `omega / R^2` is a ratio of positive reals, so the
/// fractional powers are the ordinary real ones.
pub fn eval_s_special(
    curve: &PanelizedCurve,
    panel: usize,
    f: &LineDensity,
    x_bar: &Vec3,
    root: &RootPair,
) -> Result<Vec3> {
    check_inputs(curve, f)?;
    if panel >= curve.grid.panel_count() {
        return invalid(format!("panel {panel} out of range"));
    }
    let rule = curve.grid.rule();
    let nodes = rule.nodes();
    let n = rule.order();
    let w1 = solve_vandermonde_transpose(nodes, &qkp_moments(root.z1, 1, n)?)?;
    let w3 = solve_vandermonde_transpose(nodes, &qkp_moments(root.z1, 3, n)?)?;

    let mut sum = Vec3::zeros();
    for (l, i) in curve.grid.panel_range(panel).enumerate() {
        let r = x_bar - curve.positions[i];
        let r2 = r.norm_squared();
        if r2 == 0.0 {
            return Err(Error::DivisionByZero { distance: 0.0 });
        }
        let ratio = (nodes[l] - root.z1).norm_sqr() / r2;
        let sqrt_ratio = ratio.sqrt();
        let fi = &f.samples[i];
        sum += fi * (w1[l] * sqrt_ratio) + r * (r.dot(fi) * w3[l] * ratio * sqrt_ratio);
    }
    Ok(sum * (0.5 * curve.grid.panel_width()))
}

/// Result of [`eval_s_detailed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesletValue {
    pub value: Vec3,
    /// Panels integrated with special quadrature.
    pub special_panels: usize,
    /// Near panels that fell back to regular quadrature because no root
    /// was found.
    pub fallbacks: usize,
}

/// `S[f](x_bar)` with near/far dispatch per panel.
pub fn eval_s(curve: &PanelizedCurve, f: &LineDensity, x_bar: &Vec3, cfg: &NearEvalConfig) -> Result<Vec3> {
    Ok(eval_s_detailed(curve, f, x_bar, cfg)?.value)
}

pub fn eval_s_detailed(
    curve: &PanelizedCurve,
    f: &LineDensity,
    x_bar: &Vec3,
    cfg: &NearEvalConfig,
) -> Result<StokesletValue> {
    check_inputs(curve, f)?;
    cfg.validate()?;
    let threshold = cfg.switch_factor * curve.grid.panel_width();
    let mut out = StokesletValue {
        value: Vec3::zeros(),
        special_panels: 0,
        fallbacks: 0,
    };
    for m in 0..curve.grid.panel_count() {
        let dist = curve.grid.panel_range(m)
            .map(|i| (x_bar - curve.positions[i]).norm())
            .fold(f64::INFINITY, f64::min);
        if dist == 0.0 {
            return Err(Error::DivisionByZero { distance: 0.0 });
        }
        let contribution = if dist > threshold {
            regular_panel(curve, f, x_bar, m)?
        } else {
            match find_root(&curve.panel_coeffs[m], x_bar, cfg) {
                Ok(root) if root.z1.im < NEAR_ROOT_IMAG => {
                    out.special_panels += 1;
                    eval_s_special(curve, m, f, x_bar, &root)?
                }
                Ok(_) => regular_panel(curve, f, x_bar, m)?,
                Err(e) => {
                    // far inside the switch zone regular quadrature is still
                    // accurate, so only failures close to the panel matter
                    if dist < 0.1 * curve.grid.panel_width() {
                        warn!("panel {m}: {e}; using regular quadrature at {x_bar:?}");
                    } else {
                        debug!("panel {m}: {e}; using regular quadrature at {x_bar:?}");
                    }
                    out.fallbacks += 1;
                    regular_panel(curve, f, x_bar, m)?
                }
            }
        };
        out.value += contribution;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{discretize, make_straight};
    use crate::quadcore::gauss_legendre;

    /// Stokeslet of a unit segment on the x axis with constant force
    /// (0, 0, 1), evaluated at (x0, d, 0); the RR term vanishes because
    /// R . f = 0.
    fn segment_closed_form(x0: f64, d: f64) -> f64 {
        (x0 / d).asinh() + ((1.0 - x0) / d).asinh()
    }

    #[test]
    fn zero_force() {
        let rule = gauss_legendre(16).unwrap();
        let curve = discretize(&make_straight(Vec3::x(), 1.0).unwrap(), 2, &rule).unwrap();
        let f = LineDensity::sample(&curve.grid, |_| Vec3::zeros());
        let v = eval_s(&curve, &f, &Vec3::new(0.3, 0.01, 0.0), &NearEvalConfig::default()).unwrap();
        assert_eq!(v, Vec3::zeros());
    }

    #[test]
    fn regular_far_from_segment() {
        let rule = gauss_legendre(16).unwrap();
        let curve = discretize(&make_straight(Vec3::x(), 1.0).unwrap(), 4, &rule).unwrap();
        let f = LineDensity::sample(&curve.grid, |_| Vec3::z());
        let v = eval_s_regular(&curve, &f, &Vec3::new(0.5, 1.0, 0.0)).unwrap();
        assert!((v.z - 2.0 * 0.5f64.asinh()).abs() < 1e-12);
        assert!(v.x.abs() < 1e-15 && v.y.abs() < 1e-15);
    }

    #[test]
    fn special_near_segment() {
        let rule = gauss_legendre(16).unwrap();
        let curve = discretize(&make_straight(Vec3::x(), 1.0).unwrap(), 1, &rule).unwrap();
        let f = LineDensity::sample(&curve.grid, |_| Vec3::z());
        let x_bar = Vec3::new(0.5, 1e-3, 0.0);
        let exact = segment_closed_form(0.5, 1e-3);
        let special = eval_s(&curve, &f, &x_bar, &NearEvalConfig::default()).unwrap();
        let regular = eval_s_regular(&curve, &f, &x_bar).unwrap();
        assert!((special.z - exact).abs() < 1e-10, "{} vs {exact}", special.z);
        assert!((regular.z - exact).abs() >= 1e-2);
    }

    #[test]
    fn on_curve_point_is_an_error() {
        let rule = gauss_legendre(16).unwrap();
        let curve = discretize(&make_straight(Vec3::x(), 1.0).unwrap(), 1, &rule).unwrap();
        let f = LineDensity::sample(&curve.grid, |_| Vec3::z());
        let node = curve.positions[3];
        assert!(matches!(eval_s_regular(&curve, &f, &node), Err(Error::DivisionByZero { .. })));
        assert!(eval_s(&curve, &f, &node, &NearEvalConfig::default()).is_err());
    }
}
