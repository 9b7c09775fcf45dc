use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Highest supported rule order.
pub const MAX_ORDER: usize = 64;

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Nodes are stored in increasing order. The rule also caches the values
/// `P_k(node_l)` of the Legendre polynomials up to degree `order - 1`, which
/// makes the discrete Legendre transform a single matrix-vector product.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // legendre[l * n + k] = P_k(nodes[l])
    legendre: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `P_k` evaluated at node `l`.
    #[inline]
    pub fn legendre_at_node(&self, l: usize, k: usize) -> f64 {
        self.legendre[l * self.order() + k]
    }

    /// Applies the rule to `f` on [-1, 1].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    // P_n' = n (x P_n - P_{n-1}) / (x^2 - 1), fine away from the endpoints
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Computes the `order`-point Gauss-Legendre rule.
///
/// Nodes are found by Newton iteration on `P_order` from Chebyshev-like
/// initial guesses. Only the non-negative half is iterated; the other half is
/// mirrored so the rule is exactly symmetric.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_ORDER).contains(&order) {
        return invalid(format!("rule order {order} outside 1..={MAX_ORDER}"));
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;

    for i in 0..n.div_ceil(2) {
        // i-th largest root
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // odd order: the middle root is exactly zero
        if n % 2 == 1 && i == n / 2 {
            x = 0.0;
        }
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }

    let mut legendre = vec![0.0; n * n];
    for (l, &x) in nodes.iter().enumerate() {
        let row = &mut legendre[l * n..(l + 1) * n];
        row[0] = 1.0;
        if n > 1 {
            row[1] = x;
        }
        for k in 1..n.saturating_sub(1) {
            let kf = k as f64;
            row[k + 1] = ((2.0 * kf + 1.0) * x * row[k] - kf * row[k - 1]) / (kf + 1.0);
        }
    }

    Ok(QuadratureRule {
        nodes,
        weights,
        legendre,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let rule = gauss_legendre(1).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert!((rule.weights()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule() {
        let rule = gauss_legendre(2).unwrap();
        let r = 1.0 / 3f64.sqrt();
        assert!((rule.nodes()[0] + r).abs() < 1e-15);
        assert!((rule.nodes()[1] - r).abs() < 1e-15);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-15);
        assert!((rule.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sixteen_point_rule_moments() {
        let rule = gauss_legendre(16).unwrap();
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        for k in 0..32 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let approx = rule.integrate(|x| x.powi(k));
            assert!((approx - exact).abs() < 1e-13, "k={k}: {approx} vs {exact}");
        }
    }

    #[test]
    fn invariants_hold_for_all_orders() {
        for n in 1..=MAX_ORDER {
            let rule = gauss_legendre(n).unwrap();
            let x = rule.nodes();
            assert!(x.windows(2).all(|w| w[0] < w[1]), "order {n} not increasing");
            assert!(x[0] > -1.0 && x[n - 1] < 1.0);
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i]).abs() <= 1e-15);
            }
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 2.0).abs() < 1e-14, "order {n}: sum {total}");
        }
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(65).is_err());
    }
}
