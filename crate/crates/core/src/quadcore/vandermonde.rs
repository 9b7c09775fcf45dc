//! Björck-Pereyra solvers for monomial Vandermonde systems.
//!
//! With `A[l][k] = nodes[l]^k`, [`solve_vandermonde`] returns the monomial
//! coefficients of the interpolant (`A c = p`) and
//! [`solve_vandermonde_transpose`] solves the moment system `A^T b = q`.
//! Both run in O(n^2) and stay accurate well beyond what the condition
//! number of `A` would suggest for dense elimination. Nodes are processed in
//! Leja order, which keeps the residual near machine precision for nodes of
//! mixed sign such as Gauss-Legendre points.

use crate::error::{Error, Result};

fn check(nodes: &[f64], rhs: &[f64]) -> Result<()> {
    if nodes.len() != rhs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} nodes but {} right-hand side entries",
            nodes.len(),
            rhs.len()
        )));
    }
    for (i, a) in nodes.iter().enumerate() {
        if nodes[i + 1..].contains(a) {
            return Err(Error::SingularSystem(format!("duplicate node {a}")));
        }
    }
    Ok(())
}

/// Leja ordering: start from the node of largest magnitude, then repeatedly
/// take the node maximizing the product of distances to those already taken.
fn leja_order(nodes: &[f64]) -> Vec<usize> {
    let n = nodes.len();
    let mut order = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    let mut log_dist = vec![0.0f64; n];
    let Some(first) = (0..n).max_by(|&a, &b| nodes[a].abs().total_cmp(&nodes[b].abs())) else {
        return order;
    };
    let mut next = first;
    loop {
        order.push(next);
        taken[next] = true;
        if order.len() == n {
            break;
        }
        let mut best: Option<usize> = None;
        for i in 0..n {
            if taken[i] {
                continue;
            }
            log_dist[i] += (nodes[i] - nodes[next]).abs().ln();
            if best.is_none_or(|b| log_dist[i] > log_dist[b]) {
                best = Some(i);
            }
        }
        next = best.expect("untaken node remains");
    }
    order
}

/// Solves `sum_k c[k] nodes[l]^k = rhs[l]` for the monomial coefficients `c`.
pub fn solve_vandermonde(nodes: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    check(nodes, rhs)?;
    let order = leja_order(nodes);
    let x: Vec<f64> = order.iter().map(|&i| nodes[i]).collect();
    let mut c: Vec<f64> = order.iter().map(|&i| rhs[i]).collect();
    let n = c.len();
    if n == 0 {
        return Ok(c);
    }
    // Newton divided differences
    for k in 0..n - 1 {
        for i in (k + 1..n).rev() {
            c[i] = (c[i] - c[i - 1]) / (x[i] - x[i - k - 1]);
        }
    }
    // Newton form to monomial form
    for k in (0..n - 1).rev() {
        for i in k..n - 1 {
            c[i] -= c[i + 1] * x[k];
        }
    }
    Ok(c)
}

/// Solves `sum_l nodes[l]^k b[l] = rhs[k]`, `k = 0..n`, for `b`.
pub fn solve_vandermonde_transpose(nodes: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    check(nodes, rhs)?;
    let order = leja_order(nodes);
    let x: Vec<f64> = order.iter().map(|&i| nodes[i]).collect();
    let mut b = rhs.to_vec();
    let n = b.len();
    if n == 0 {
        return Ok(b);
    }
    for k in 0..n - 1 {
        for i in (k + 1..n).rev() {
            b[i] -= x[k] * b[i - 1];
        }
    }
    for k in (0..n - 1).rev() {
        for i in k + 1..n {
            b[i] /= x[i] - x[i - k - 1];
        }
        for i in k..n - 1 {
            b[i] -= b[i + 1];
        }
    }
    let mut out = vec![0.0; n];
    for (bi, &i) in b.into_iter().zip(&order) {
        out[i] = bi;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadcore::gauss_legendre;

    fn transpose_residual(x: &[f64], b: &[f64], rhs: &[f64]) -> f64 {
        let norm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (0..x.len())
            .map(|k| {
                let s: f64 = x.iter().zip(b).map(|(xl, bl)| xl.powi(k as i32) * bl).sum();
                (s - rhs[k]).abs()
            })
            .fold(0.0, f64::max)
            / norm
    }

    #[test]
    fn two_by_two_by_hand() {
        // [[1, 1], [-1, 1]] b = [2, 0]
        let b = solve_vandermonde_transpose(&[-1.0, 1.0], &[2.0, 0.0]).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-15 && (b[1] - 1.0).abs() < 1e-15);
        // A c = p with p = [2, 0]: c0 - c1 = 2, c0 + c1 = 0
        let c = solve_vandermonde(&[-1.0, 1.0], &[2.0, 0.0]).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15 && (c[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn columns_give_unit_vectors() {
        // dyadic nodes: every power is exact, so the right-hand sides carry
        // no rounding and the unit vectors are recovered to solver accuracy
        let x: Vec<f64> = (-7..=8).map(|j| j as f64 / 8.0).collect();
        for j in 0..16 {
            let rhs: Vec<f64> = (0..16).map(|k| x[j].powi(k)).collect();
            let b = solve_vandermonde_transpose(&x, &rhs).unwrap();
            for (l, bl) in b.iter().enumerate() {
                let e = if l == j { 1.0 } else { 0.0 };
                assert!((bl - e).abs() < 1e-12, "col {j} slot {l}: {bl}");
            }
        }
    }

    #[test]
    fn gauss_columns_are_conditioning_limited() {
        // the rounding of x_j^k alone moves the exact solution by ~2e-12
        let rule = gauss_legendre(16).unwrap();
        let x = rule.nodes();
        for j in 0..16 {
            let rhs: Vec<f64> = (0..16).map(|k| x[j].powi(k)).collect();
            let b = solve_vandermonde_transpose(x, &rhs).unwrap();
            assert!(transpose_residual(x, &b, &rhs) < 1e-14);
            for (l, bl) in b.iter().enumerate() {
                let e = if l == j { 1.0 } else { 0.0 };
                assert!((bl - e).abs() < 1e-11, "col {j} slot {l}: {bl}");
            }
        }
    }

    #[test]
    fn leja_order_is_a_permutation() {
        let rule = gauss_legendre(16).unwrap();
        let mut o = leja_order(rule.nodes());
        assert!(rule.nodes()[o[0]].abs() == rule.nodes()[15]);
        o.sort();
        assert_eq!(o, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn interpolation_of_polynomial() {
        let rule = gauss_legendre(16).unwrap();
        let coeffs: Vec<f64> = (0..16).map(|k| ((k * 7 % 5) as f64 - 2.0) / 3.0).collect();
        let p: Vec<f64> = rule
            .nodes()
            .iter()
            .map(|&x| coeffs.iter().rev().fold(0.0, |a, c| a * x + c))
            .collect();
        let c = solve_vandermonde(rule.nodes(), &p).unwrap();
        for (a, b) in c.iter().zip(&coeffs) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn sign_moment_rhs_residual() {
        let rule = gauss_legendre(16).unwrap();
        let x = rule.nodes();
        let eta = x[2];
        let rhs: Vec<f64> = (0..16)
            .map(|k| {
                let k1 = (k + 1) as f64;
                (1.0 + (-1f64).powi(k + 1) - 2.0 * eta.powi(k + 1)) / k1
            })
            .collect();
        let b = solve_vandermonde_transpose(x, &rhs).unwrap();
        assert!(transpose_residual(x, &b, &rhs) <= 1e-10);
    }

    #[test]
    fn duplicate_nodes_are_singular() {
        let err = solve_vandermonde_transpose(&[0.1, 0.2, 0.1], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::SingularSystem(_)));
        assert!(solve_vandermonde(&[0.5, 0.5], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            solve_vandermonde(&[0.1, 0.2], &[1.0]),
            Err(Error::InvalidArgument(_))
        ));
    }
}
