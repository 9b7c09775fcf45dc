use super::gauss::QuadratureRule;
use super::legendre::{to_legendre, Expansion};
use crate::error::{invalid, Error, Result};

/// `[0, L]` split into `M` equal panels, each carrying a copy of the
/// reference Gauss-Legendre rule.
///
/// Global node `m * order + l` sits at `m * ds + ds / 2 * (eta_l + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelGrid {
    fiber_length: f64,
    panel_count: usize,
    panel_width: f64,
    rule: QuadratureRule,
    global_nodes: Vec<f64>,
}

/// Splits `[0, fiber_length]` into `panel_count` panels of equal width.
pub fn panelize(fiber_length: f64, panel_count: usize, rule: &QuadratureRule) -> Result<PanelGrid> {
    if !(fiber_length > 0.0) || !fiber_length.is_finite() {
        return invalid(format!("fiber length must be positive, got {fiber_length}"));
    }
    if panel_count == 0 {
        return invalid("panel count must be at least 1");
    }
    let ds = fiber_length / panel_count as f64;
    let global_nodes = (0..panel_count)
        .flat_map(|m| {
            rule.nodes()
                .iter()
                .map(move |&eta| m as f64 * ds + 0.5 * ds * (eta + 1.0))
        })
        .collect();
    Ok(PanelGrid {
        fiber_length,
        panel_count,
        panel_width: ds,
        rule: rule.clone(),
        global_nodes,
    })
}

impl PanelGrid {
    pub fn fiber_length(&self) -> f64 {
        self.fiber_length
    }

    pub fn panel_count(&self) -> usize {
        self.panel_count
    }

    pub fn panel_width(&self) -> f64 {
        self.panel_width
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    pub fn node_count(&self) -> usize {
        self.global_nodes.len()
    }

    pub fn global_nodes(&self) -> &[f64] {
        &self.global_nodes
    }

    /// Panel index and local node index of a global node.
    #[inline]
    pub fn locate(&self, index: usize) -> (usize, usize) {
        (index / self.order(), index % self.order())
    }

    /// Global index range of the nodes of panel `m`.
    pub fn panel_range(&self, m: usize) -> std::ops::Range<usize> {
        let n = self.order();
        m * n..(m + 1) * n
    }

    pub fn panel_start(&self, m: usize) -> f64 {
        m as f64 * self.panel_width
    }

    /// Arclength of local coordinate `eta` on panel `m`.
    pub fn arclength(&self, m: usize, eta: f64) -> f64 {
        self.panel_start(m) + 0.5 * self.panel_width * (eta + 1.0)
    }

    /// Panel containing `s` and the local coordinate of `s` on it. Points on
    /// a shared panel boundary belong to the lower panel.
    pub fn panel_of(&self, s: f64) -> Result<(usize, f64)> {
        if !(0.0..=self.fiber_length).contains(&s) {
            return Err(Error::OutOfRange {
                value: s,
                lower: 0.0,
                upper: self.fiber_length,
            });
        }
        let scaled = s / self.panel_width;
        let m = (scaled.ceil() as usize).saturating_sub(1).min(self.panel_count - 1);
        let eta = (-1.0 + 2.0 * (s - self.panel_start(m)) / self.panel_width).clamp(-1.0, 1.0);
        Ok((m, eta))
    }

    /// Composite quadrature of node samples over `[0, L]`.
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        let w = self.rule.weights();
        let n = self.order();
        0.5 * self.panel_width
            * samples
                .iter()
                .enumerate()
                .map(|(i, v)| w[i % n] * v)
                .sum::<f64>()
    }

    /// Legendre interpolants of node samples, one per panel.
    pub fn panel_expansions(&self, samples: &[f64]) -> Result<Vec<Expansion>> {
        if samples.len() != self.node_count() {
            return invalid(format!(
                "expected {} samples, got {}",
                self.node_count(),
                samples.len()
            ));
        }
        (0..self.panel_count)
            .map(|m| to_legendre(&samples[self.panel_range(m)], &self.rule))
            .collect()
    }
}

/// Evaluates the per-panel Legendre interpolant of node samples at
/// arbitrary arclength targets.
pub fn interpolate_to_uniform(
    panel_samples: &[f64],
    grid: &PanelGrid,
    targets: &[f64],
) -> Result<Vec<f64>> {
    let expansions = grid.panel_expansions(panel_samples)?;
    targets
        .iter()
        .map(|&s| {
            let (m, eta) = grid.panel_of(s)?;
            Ok(expansions[m].eval(eta))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadcore::gauss_legendre;
    use std::f64::consts::PI;

    #[test]
    fn single_panel_is_affine_map() {
        let rule = gauss_legendre(16).unwrap();
        let grid = panelize(1.0, 1, &rule).unwrap();
        assert_eq!(grid.node_count(), 16);
        for (s, eta) in grid.global_nodes().iter().zip(rule.nodes()) {
            assert!((s - (eta + 1.0) / 2.0).abs() < 1e-16);
            assert!(*s > 0.0 && *s < 1.0);
        }
    }

    #[test]
    fn helix_length_grid() {
        let rule = gauss_legendre(16).unwrap();
        let grid = panelize(1.5, 8, &rule).unwrap();
        assert_eq!(grid.panel_width(), 3.0 / 16.0);
        assert_eq!(grid.node_count(), 128);
        let (m, l) = grid.locate(37);
        let expected = m as f64 * 3.0 / 16.0 + 3.0 / 32.0 * (rule.nodes()[l] + 1.0);
        assert!((grid.global_nodes()[37] - expected).abs() < 1e-15);
    }

    #[test]
    fn composite_integrals() {
        let rule = gauss_legendre(16).unwrap();
        let grid = panelize(1.0, 2, &rule).unwrap();
        let sq: Vec<f64> = grid.global_nodes().iter().map(|s| s * s).collect();
        assert!((grid.integrate(&sq) - 1.0 / 3.0).abs() < 1e-15);
        for m in [2, 3, 5, 8] {
            let grid = panelize(1.0, m, &rule).unwrap();
            let e: Vec<f64> = grid.global_nodes().iter().map(|s| s.exp()).collect();
            assert!((grid.integrate(&e) - (1f64.exp() - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let rule = gauss_legendre(4).unwrap();
        assert!(panelize(0.0, 2, &rule).is_err());
        assert!(panelize(-1.0, 2, &rule).is_err());
        assert!(panelize(1.0, 0, &rule).is_err());
    }

    #[test]
    fn boundary_targets_use_lower_panel() {
        let rule = gauss_legendre(4).unwrap();
        let grid = panelize(1.0, 4, &rule).unwrap();
        assert_eq!(grid.panel_of(0.25).unwrap(), (0, 1.0));
        assert_eq!(grid.panel_of(0.0).unwrap(), (0, -1.0));
        assert_eq!(grid.panel_of(1.0).unwrap(), (3, 1.0));
        assert!(matches!(grid.panel_of(1.0 + 1e-12), Err(Error::OutOfRange { .. })));
        assert!(grid.panel_of(-1e-12).is_err());
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let rule = gauss_legendre(16).unwrap();
        let grid = panelize(2.0, 3, &rule).unwrap();
        let p = |s: f64| (0..16).fold(0.0, |acc, k| acc * (s - 1.0) + (k as f64 * 0.37).sin());
        let samples: Vec<f64> = grid.global_nodes().iter().map(|&s| p(s)).collect();
        let targets: Vec<f64> = (0..=50).map(|i| 2.0 * i as f64 / 50.0).collect();
        let values = interpolate_to_uniform(&samples, &grid, &targets).unwrap();
        for (t, v) in targets.iter().zip(&values) {
            assert!((v - p(*t)).abs() < 1e-12 * p(*t).abs().max(1.0));
        }
        let at_nodes = interpolate_to_uniform(&samples, &grid, grid.global_nodes()).unwrap();
        for (a, b) in at_nodes.iter().zip(&samples) {
            assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0));
        }
    }

    #[test]
    fn interpolation_of_resolved_sine() {
        let rule = gauss_legendre(16).unwrap();
        let grid = panelize(1.0, 8, &rule).unwrap();
        let samples: Vec<f64> = grid
            .global_nodes()
            .iter()
            .map(|s| (2.0 * PI * s).sin())
            .collect();
        let targets: Vec<f64> = (0..400).map(|i| i as f64 / 399.0).collect();
        let values = interpolate_to_uniform(&samples, &grid, &targets).unwrap();
        let err = targets
            .iter()
            .zip(&values)
            .map(|(t, v)| (v - (2.0 * PI * t).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10, "max deviation {err}");
        assert!(interpolate_to_uniform(&samples, &grid, &[1.5]).is_err());
    }
}
