//! Arclength-parameterized fiber centerlines and their discretization on
//! panel grids.

use std::fmt;
use std::sync::Arc;

use nalgebra::Isometry3;

use crate::error::{invalid, Error, Result};
use crate::quadcore::{panelize, to_legendre, Expansion, PanelGrid, QuadratureRule};
use crate::Vec3;

/// A centerline function `s -> R^3` supplied by the caller.
pub type CurveFn = Arc<dyn Fn(f64) -> Vec3 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    Straight {
        direction: Vec3,
    },
    Helix {
        radius: f64,
        rise: f64,
        // s / scale is the helix angle
        scale: f64,
    },
    Custom {
        position: CurveFn,
        tangent: CurveFn,
        second_derivative: CurveFn,
    },
}

/// Which family a [`FiberCurve`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    Straight,
    Helix { curvature: f64, torsion: f64 },
    Custom,
}

/// A fiber centerline `x(s)`, `s in [0, L]`, parameterized by arclength.
#[derive(Clone)]
pub struct FiberCurve {
    shape: Shape,
    kind: CurveKind,
    length: f64,
    placement: Isometry3<f64>,
}

impl fmt::Debug for FiberCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiberCurve")
            .field("kind", &self.kind)
            .field("length", &self.length)
            .field("placement", &self.placement)
            .finish()
    }
}

fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        invalid(format!("fiber length must be positive, got {length}"))
    }
}

/// Circular helix with constant curvature and torsion,
/// `x(s) = (a cos(s/c), a sin(s/c), b s/c)` where
/// `a = k/(k^2 + t^2)`, `b = t/(k^2 + t^2)` and `c = 1/sqrt(k^2 + t^2)`.
pub fn make_helix(curvature: f64, torsion: f64, length: f64) -> Result<FiberCurve> {
    if !(curvature > 0.0) || !curvature.is_finite() || !torsion.is_finite() {
        return invalid(format!(
            "helix needs positive curvature and finite torsion, got ({curvature}, {torsion})"
        ));
    }
    check_length(length)?;
    let k2 = curvature * curvature + torsion * torsion;
    Ok(FiberCurve {
        shape: Shape::Helix {
            radius: curvature / k2,
            rise: torsion / k2,
            scale: 1.0 / k2.sqrt(),
        },
        kind: CurveKind::Helix { curvature, torsion },
        length,
        placement: Isometry3::identity(),
    })
}

/// Straight fiber `x(s) = s * direction`.
pub fn make_straight(direction: Vec3, length: f64) -> Result<FiberCurve> {
    if (direction.norm() - 1.0).abs() > 1e-12 {
        return invalid(format!(
            "direction must be a unit vector, |d| = {}",
            direction.norm()
        ));
    }
    check_length(length)?;
    Ok(FiberCurve {
        shape: Shape::Straight { direction },
        kind: CurveKind::Straight,
        length,
        placement: Isometry3::identity(),
    })
}

/// A curve from user closures for `x`, `x_s` and `x_ss`. The closures are
/// trusted to describe an arclength parameterization; see
/// [`FiberCurve::validate`].
pub fn make_custom(
    length: f64,
    position: CurveFn,
    tangent: CurveFn,
    second_derivative: CurveFn,
) -> Result<FiberCurve> {
    check_length(length)?;
    Ok(FiberCurve {
        shape: Shape::Custom {
            position,
            tangent,
            second_derivative,
        },
        kind: CurveKind::Custom,
        length,
        placement: Isometry3::identity(),
    })
}

impl FiberCurve {
    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// The same curve moved by a rigid motion.
    pub fn with_placement(&self, placement: Isometry3<f64>) -> FiberCurve {
        FiberCurve {
            placement: placement * self.placement,
            ..self.clone()
        }
    }

    pub fn placement(&self) -> &Isometry3<f64> {
        &self.placement
    }

    pub fn position(&self, s: f64) -> Vec3 {
        let local = match &self.shape {
            Shape::Straight { direction } => s * direction,
            Shape::Helix {
                radius,
                rise,
                scale,
            } => {
                let t = s / scale;
                Vec3::new(radius * t.cos(), radius * t.sin(), rise * t)
            }
            Shape::Custom { position, .. } => position(s),
        };
        self.placement.transform_point(&local.into()).coords
    }

    /// `x(s) - x(t)`. For straight and helical fibers this is evaluated in
    /// closed form, so the relative error stays at rounding level as
    /// `t -> s` and the placement's translation drops out.
    pub fn chord(&self, s: f64, t: f64) -> Vec3 {
        let local = match &self.shape {
            Shape::Straight { direction } => (s - t) * direction,
            Shape::Helix {
                radius,
                rise,
                scale,
            } => {
                let mid = 0.5 * (s + t) / scale;
                let half = (0.5 * (s - t) / scale).sin();
                Vec3::new(
                    -2.0 * radius * mid.sin() * half,
                    2.0 * radius * mid.cos() * half,
                    rise * (s - t) / scale,
                )
            }
            Shape::Custom { .. } => return self.position(s) - self.position(t),
        };
        self.placement.transform_vector(&local)
    }

    /// Unit tangent `x_s`.
    pub fn tangent(&self, s: f64) -> Vec3 {
        let local = match &self.shape {
            Shape::Straight { direction } => *direction,
            Shape::Helix {
                radius,
                rise,
                scale,
            } => {
                let t = s / scale;
                Vec3::new(-radius * t.sin(), radius * t.cos(), *rise) / *scale
            }
            Shape::Custom { tangent, .. } => tangent(s),
        };
        self.placement.transform_vector(&local)
    }

    /// Curvature vector `x_ss`.
    pub fn second_derivative(&self, s: f64) -> Vec3 {
        let local = match &self.shape {
            Shape::Straight { .. } => Vec3::zeros(),
            Shape::Helix { radius, scale, .. } => {
                let t = s / scale;
                -radius / (scale * scale) * Vec3::new(t.cos(), t.sin(), 0.0)
            }
            Shape::Custom {
                second_derivative, ..
            } => second_derivative(s),
        };
        self.placement.transform_vector(&local)
    }

    /// Checks `|x_s| = 1` and `x_s . x_ss = 0` at the nodes of a grid.
    pub fn validate(&self, rule: &QuadratureRule, panel_count: usize) -> Result<()> {
        let grid = panelize(self.length, panel_count, rule)?;
        for &s in grid.global_nodes() {
            let t = self.tangent(s);
            let unit = (t.norm() - 1.0).abs();
            let ortho = t.dot(&self.second_derivative(s)).abs();
            if unit > 1e-12 || ortho > 1e-12 * self.second_derivative(s).norm().max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "curve is not arclength parameterized at s = {s}: ||x_s| - 1| = {unit:e}, x_s.x_ss = {ortho:e}"
                )));
            }
        }
        Ok(())
    }
}

/// A centerline sampled on a panel grid, with per-panel Legendre
/// interpolants of each coordinate.
#[derive(Debug, Clone)]
pub struct PanelizedCurve {
    pub grid: PanelGrid,
    pub positions: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
    pub second_derivs: Vec<Vec3>,
    /// `panel_coeffs[m][c]` interpolates coordinate `c` over panel `m`.
    pub panel_coeffs: Vec<[Expansion; 3]>,
    curve: FiberCurve,
}

impl PartialEq for PanelizedCurve {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.positions == other.positions
            && self.tangents == other.tangents
            && self.second_derivs == other.second_derivs
            && self.panel_coeffs == other.panel_coeffs
    }
}

/// Samples `curve` at the nodes of an `M`-panel grid.
pub fn discretize(
    curve: &FiberCurve,
    panel_count: usize,
    rule: &QuadratureRule,
) -> Result<PanelizedCurve> {
    let grid = panelize(curve.length(), panel_count, rule)?;
    let nodes = grid.global_nodes();
    let positions: Vec<Vec3> = nodes.iter().map(|&s| curve.position(s)).collect();
    let tangents = nodes.iter().map(|&s| curve.tangent(s)).collect();
    let second_derivs = nodes.iter().map(|&s| curve.second_derivative(s)).collect();

    let mut panel_coeffs = Vec::with_capacity(panel_count);
    for m in 0..panel_count {
        let panel = &positions[grid.panel_range(m)];
        let coordinate = |c: usize| -> Result<Expansion> {
            let samples: Vec<f64> = panel.iter().map(|x| x[c]).collect();
            to_legendre(&samples, rule)
        };
        panel_coeffs.push([coordinate(0)?, coordinate(1)?, coordinate(2)?]);
    }

    Ok(PanelizedCurve {
        grid,
        positions,
        tangents,
        second_derivs,
        panel_coeffs,
        curve: curve.clone(),
    })
}

impl PanelizedCurve {
    /// The continuous curve this was sampled from.
    pub fn curve(&self) -> &FiberCurve {
        &self.curve
    }

    /// `x(s_i) - x(s_j)` between grid nodes, see [`FiberCurve::chord`].
    pub fn chord(&self, i: usize, j: usize) -> Vec3 {
        let s = self.grid.global_nodes();
        self.curve.chord(s[i], s[j])
    }

    /// Interpolated centerline point at local coordinate `eta` of panel `m`.
    pub fn interpolate(&self, m: usize, eta: f64) -> Vec3 {
        let [x, y, z] = &self.panel_coeffs[m];
        Vec3::new(x.eval(eta), y.eval(eta), z.eval(eta))
    }
}
