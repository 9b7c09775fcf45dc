//! Local operator, finite-part operator and the simplified model operator
//!
//! ```text
//! L[f](t) = int_0^L (f(s) - f(t)) / |s - t| ds
//! K[f](t) = int_0^L [(I + RR/|R|^2)/|R| f(s) - (I + x_s x_s(t))/|s - t| f(t)] ds
//! ```
//!
//! Both are rewritten as `int_0^L phi(s, t) sign(s - t) ds` with a smooth
//! `phi`. Panels not containing the target are integrated with the regular
//! Gauss-Legendre weights; the target's own panel uses product integration
//! through a precomputed [`ModifiedWeightTable`].

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use crate::error::{invalid, Result};
use crate::geometry::{FiberCurve, PanelizedCurve};
use crate::quadcore::{
    solve_vandermonde_transpose, to_legendre, PanelGrid, QuadratureRule, MAX_ORDER,
};
use crate::Vec3;

/// Sign-kernel moment `q_k(t) = int_{-1}^{1} eta^k sign(eta - t) d eta`.
pub fn qk_signkernel(k: usize, eta_bar: f64) -> Result<f64> {
    if k >= MAX_ORDER {
        return invalid(format!("moment index {k} exceeds {}", MAX_ORDER - 1));
    }
    if !(-1.0..=1.0).contains(&eta_bar) {
        return invalid(format!("eta_bar = {eta_bar} outside [-1, 1]"));
    }
    let k1 = (k + 1) as f64;
    let odd = if k % 2 == 0 { 0.0 } else { 2.0 };
    Ok((odd - 2.0 * eta_bar.powi(k as i32 + 1)) / k1)
}

/// Target-specific product-integration weights for the sign kernel.
///
/// Row `l` holds `b(eta_l)`, the solution of `A^T b = q(eta_l)` with the
/// monomial Vandermonde matrix of the rule nodes, so that
/// `sum_k b_k(eta_l) phi(eta_k)` integrates the interpolant of `phi` against
/// `sign(eta - eta_l)` exactly. The table depends only on the rule and is
/// shared by every panel.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedWeightTable {
    order: usize,
    weights: Vec<f64>,
}

impl ModifiedWeightTable {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Weights `b_k(eta_l)`, `k = 0..order`.
    pub fn row(&self, l: usize) -> &[f64] {
        &self.weights[l * self.order..(l + 1) * self.order]
    }

    /// Applies row `l` to node samples of `phi`.
    pub fn apply(&self, l: usize, samples: &[f64]) -> f64 {
        self.row(l).iter().zip(samples).map(|(b, p)| b * p).sum()
    }
}

pub fn build_weight_table(rule: &QuadratureRule) -> Result<ModifiedWeightTable> {
    let n = rule.order();
    let nodes = rule.nodes();
    let mut weights = Vec::with_capacity(n * n);
    for &eta in nodes {
        let q = (0..n)
            .map(|k| qk_signkernel(k, eta))
            .collect::<Result<Vec<_>>>()?;
        weights.extend(solve_vandermonde_transpose(nodes, &q)?);
    }
    Ok(ModifiedWeightTable { order: n, weights })
}

/// Scalar density sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDensity {
    pub samples: Vec<f64>,
    /// Exact `f'` at the nodes, when known.
    pub derivative: Option<Vec<f64>>,
}

impl ScalarDensity {
    pub fn sample(grid: &PanelGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: grid.global_nodes().iter().map(|&s| f(s)).collect(),
            derivative: None,
        }
    }

    pub fn sample_with_derivative(
        grid: &PanelGrid,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Self {
        Self {
            derivative: Some(grid.global_nodes().iter().map(|&s| df(s)).collect()),
            ..Self::sample(grid, f)
        }
    }

    pub fn from_samples(grid: &PanelGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.node_count() {
            return invalid(format!(
                "density has {} samples, grid has {} nodes",
                samples.len(),
                grid.node_count()
            ));
        }
        Ok(Self {
            samples,
            derivative: None,
        })
    }

    fn check(&self, grid: &PanelGrid) -> Result<()> {
        let n = grid.node_count();
        if self.samples.len() != n || self.derivative.as_ref().is_some_and(|d| d.len() != n) {
            return invalid(format!("density is not sampled on a grid with {n} nodes"));
        }
        Ok(())
    }
}

/// Force per unit length sampled at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LineDensity {
    pub samples: Vec<Vec3>,
    pub derivative: Option<Vec<Vec3>>,
}

impl LineDensity {
    pub fn sample(grid: &PanelGrid, f: impl Fn(f64) -> Vec3) -> Self {
        Self {
            samples: grid.global_nodes().iter().map(|&s| f(s)).collect(),
            derivative: None,
        }
    }

    pub fn sample_with_derivative(
        grid: &PanelGrid,
        f: impl Fn(f64) -> Vec3,
        df: impl Fn(f64) -> Vec3,
    ) -> Self {
        Self {
            derivative: Some(grid.global_nodes().iter().map(|&s| df(s)).collect()),
            ..Self::sample(grid, f)
        }
    }

    pub fn from_samples(grid: &PanelGrid, samples: Vec<Vec3>) -> Result<Self> {
        if samples.len() != grid.node_count() {
            return invalid(format!(
                "density has {} samples, grid has {} nodes",
                samples.len(),
                grid.node_count()
            ));
        }
        Ok(Self {
            samples,
            derivative: None,
        })
    }

    /// Component `c` as a scalar density.
    pub fn component(&self, c: usize) -> ScalarDensity {
        ScalarDensity {
            samples: self.samples.iter().map(|v| v[c]).collect(),
            derivative: self
                .derivative
                .as_ref()
                .map(|d| d.iter().map(|v| v[c]).collect()),
        }
    }

    fn check(&self, grid: &PanelGrid) -> Result<()> {
        let n = grid.node_count();
        if self.samples.len() != n || self.derivative.as_ref().is_some_and(|d| d.len() != n) {
            return invalid(format!("density is not sampled on a grid with {n} nodes"));
        }
        Ok(())
    }
}

/// How the `(2 - ss)` term of the local operator is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalOperatorForm {
    /// `2I - ss`
    #[default]
    TwoIdentityMinusDyad,
    /// `2(I - ss)`
    TwiceProjector,
}

/// Slenderness `epsilon` and viscosity `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlenderParams {
    epsilon: f64,
    mu: f64,
    pub form: LocalOperatorForm,
}

impl SlenderParams {
    /// Requires `0 < epsilon < e^{-1/2}` so that `c = log(epsilon^2 e) < 0`.
    pub fn new(epsilon: f64, mu: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < (-0.5f64).exp()) {
            return invalid(format!(
                "epsilon = {epsilon} must lie in (0, e^(-1/2)) for c < 0"
            ));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return invalid(format!("viscosity must be positive, got {mu}"));
        }
        Ok(Self {
            epsilon,
            mu,
            form: LocalOperatorForm::default(),
        })
    }

    pub fn with_form(self, form: LocalOperatorForm) -> Self {
        Self { form, ..self }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `c = log(epsilon^2 e)`.
    pub fn c(&self) -> f64 {
        2.0 * self.epsilon.ln() + 1.0
    }
}

/// Difference quotient `(f(s) - f(t)) / (s - t)`, or `f'(t)` when `s == t`.
pub fn g0_scalar(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    s: f64,
    s_bar: f64,
) -> f64 {
    if s == s_bar {
        df(s_bar)
    } else {
        (f(s) - f(s_bar)) / (s - s_bar)
    }
}

/// Smooth factor of the K integrand for `s != t`.
#[inline]
/// `r = x(s) - x(t)`.
fn g_offdiagonal(r: &Vec3, s: f64, f: &Vec3, s_t: f64, tangent_t: &Vec3, f_t: &Vec3) -> Vec3 {
    let dist = r.norm();
    let ratio = (s - s_t).abs() / dist;
    let r_hat = r / dist;
    let near = (f + r_hat * r_hat.dot(f)) * ratio;
    let local = f_t + tangent_t * tangent_t.dot(f_t);
    (near - local) / (s - s_t)
}

/// Limit of the smooth factor as `s -> t`.
#[inline]
fn g_limit(tangent: &Vec3, curvature: &Vec3, f: &Vec3, df: &Vec3) -> Vec3 {
    0.5 * (tangent * curvature.dot(f) + curvature * tangent.dot(f)) + df + tangent * tangent.dot(df)
}

/// Smooth factor `g(s, t)` of the K integrand for a continuous curve and
/// force, switching to the analytic limit when `s == t`.
pub fn g_pointwise(
    curve: &FiberCurve,
    f: impl Fn(f64) -> Vec3,
    df: impl Fn(f64) -> Vec3,
    s: f64,
    s_bar: f64,
) -> Vec3 {
    let tangent = curve.tangent(s_bar);
    if s == s_bar {
        return g_limit(&tangent, &curve.second_derivative(s_bar), &f(s_bar), &df(s_bar));
    }
    g_offdiagonal(
        &curve.chord(s, s_bar),
        s,
        &f(s),
        s_bar,
        &tangent,
        &f(s_bar),
    )
}

/// Arclength derivative of node samples by differentiating each panel's
/// Legendre interpolant.
fn spectral_derivative(grid: &PanelGrid, samples: &[f64], panels: impl Iterator<Item = usize>) -> Result<Vec<f64>> {
    let rule = grid.rule();
    let scale = 2.0 / grid.panel_width();
    let mut out = vec![0.0; samples.len()];
    for m in panels {
        let range = grid.panel_range(m);
        // shifting by a panel value leaves the derivative unchanged and makes
        // it exactly zero for constant data
        let base = samples[range.start];
        let shifted: Vec<f64> = samples[range.clone()].iter().map(|v| v - base).collect();
        let d = to_legendre(&shifted, rule)?.derivative();
        for (i, &eta) in range.zip(rule.nodes()) {
            out[i] = scale * d.eval(eta);
        }
    }
    Ok(out)
}

fn scalar_derivative_at(grid: &PanelGrid, f: &ScalarDensity, target: usize) -> Result<f64> {
    if let Some(d) = &f.derivative {
        return Ok(d[target]);
    }
    let (m, _) = grid.locate(target);
    Ok(spectral_derivative(grid, &f.samples, std::iter::once(m))?[target])
}

fn vector_derivatives(grid: &PanelGrid, f: &LineDensity, panels: &[usize]) -> Result<Vec<Vec3>> {
    if let Some(d) = &f.derivative {
        return Ok(d.clone());
    }
    let mut out = vec![Vec3::zeros(); f.samples.len()];
    for c in 0..3 {
        let comp: Vec<f64> = f.samples.iter().map(|v| v[c]).collect();
        let d = spectral_derivative(grid, &comp, panels.iter().copied())?;
        for (o, v) in out.iter_mut().zip(d) {
            o[c] = v;
        }
    }
    Ok(out)
}

fn check_target(grid: &PanelGrid, table: &ModifiedWeightTable, target: usize) -> Result<()> {
    if table.order() != grid.order() {
        return invalid(format!(
            "weight table of order {} used with a rule of order {}",
            table.order(),
            grid.order()
        ));
    }
    if target >= grid.node_count() {
        return invalid(format!(
            "target index {target} out of range for {} nodes",
            grid.node_count()
        ));
    }
    Ok(())
}

/// `int_0^L phi(s) sign(s - s_target) ds` over node samples of `phi`.
fn sign_kernel_quadrature<T>(
    grid: &PanelGrid,
    table: &ModifiedWeightTable,
    target: usize,
    zero: T,
    phi: impl Fn(usize) -> T,
) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let (own, l) = grid.locate(target);
    let weights = grid.rule().weights();
    let mut total = zero;
    for m in 0..grid.panel_count() {
        let range = grid.panel_range(m);
        let mut panel = zero;
        if m == own {
            for (i, &b) in range.zip(table.row(l)) {
                panel = panel + phi(i) * b;
            }
        } else {
            for (i, &w) in range.zip(weights) {
                panel = panel + phi(i) * w;
            }
            if m < own {
                panel = panel * -1.0;
            }
        }
        total = total + panel;
    }
    total * (0.5 * grid.panel_width())
}

/// `L[f]` at grid node `target_index`.
pub fn eval_l(
    f: &ScalarDensity,
    grid: &PanelGrid,
    table: &ModifiedWeightTable,
    target_index: usize,
) -> Result<f64> {
    check_target(grid, table, target_index)?;
    f.check(grid)?;
    let t = target_index;
    let s = grid.global_nodes();
    let limit = scalar_derivative_at(grid, f, t)?;
    let ft = f.samples[t];
    Ok(sign_kernel_quadrature(grid, table, t, 0.0, |i| {
        if i == t {
            limit
        } else {
            (f.samples[i] - ft) / (s[i] - s[t])
        }
    }))
}

/// `L[f]` at every grid node.
pub fn apply_l(f: &ScalarDensity, grid: &PanelGrid, table: &ModifiedWeightTable) -> Result<Vec<f64>> {
    f.check(grid)?;
    let derivative = match &f.derivative {
        Some(d) => d.clone(),
        None => spectral_derivative(grid, &f.samples, 0..grid.panel_count())?,
    };
    let with_derivative = ScalarDensity {
        samples: f.samples.clone(),
        derivative: Some(derivative),
    };
    (0..grid.node_count())
        .map(|t| eval_l(&with_derivative, grid, table, t))
        .collect()
}

/// Smooth factor `g(s_node, s_target)` of the K integrand at two grid nodes.
/// On the diagonal the analytic limit is returned, with `f'` taken from the
/// density or by spectral differentiation on the target's panel.
pub fn g_vector(
    curve: &PanelizedCurve,
    f: &LineDensity,
    node_index: usize,
    target_index: usize,
) -> Result<Vec3> {
    let grid = &curve.grid;
    f.check(grid)?;
    let n = grid.node_count();
    if node_index >= n || target_index >= n {
        return invalid(format!(
            "node {node_index} or target {target_index} out of range for {n} nodes"
        ));
    }
    let t = target_index;
    if node_index == t {
        let (m, _) = grid.locate(t);
        let df = vector_derivatives(grid, f, &[m])?;
        return Ok(g_limit(&curve.tangents[t], &curve.second_derivs[t], &f.samples[t], &df[t]));
    }
    let s = grid.global_nodes();
    Ok(g_offdiagonal(
        &curve.chord(node_index, t),
        s[node_index],
        &f.samples[node_index],
        s[t],
        &curve.tangents[t],
        &f.samples[t],
    ))
}

fn eval_k_with(
    curve: &PanelizedCurve,
    f: &LineDensity,
    table: &ModifiedWeightTable,
    t: usize,
    df_t: &Vec3,
) -> Vec3 {
    let grid = &curve.grid;
    let s = grid.global_nodes();
    let (tangent, f_t) = (&curve.tangents[t], &f.samples[t]);
    let limit = g_limit(tangent, &curve.second_derivs[t], f_t, df_t);
    sign_kernel_quadrature(grid, table, t, Vec3::zeros(), |i| {
        if i == t {
            limit
        } else {
            g_offdiagonal(&curve.chord(i, t), s[i], &f.samples[i], s[t], tangent, f_t)
        }
    })
}

/// `K[f]` at grid node `target_index`.
pub fn eval_k(
    curve: &PanelizedCurve,
    f: &LineDensity,
    table: &ModifiedWeightTable,
    target_index: usize,
) -> Result<Vec3> {
    check_target(&curve.grid, table, target_index)?;
    f.check(&curve.grid)?;
    let (m, _) = curve.grid.locate(target_index);
    let df = vector_derivatives(&curve.grid, f, &[m])?;
    Ok(eval_k_with(curve, f, table, target_index, &df[target_index]))
}

/// `K[f]` at every grid node.
pub fn apply_k(curve: &PanelizedCurve, f: &LineDensity, table: &ModifiedWeightTable) -> Result<Vec<Vec3>> {
    let grid = &curve.grid;
    check_target(grid, table, 0)?;
    f.check(grid)?;
    let panels: Vec<usize> = (0..grid.panel_count()).collect();
    let df = vector_derivatives(grid, f, &panels)?;
    Ok((0..grid.node_count())
        .map(|t| eval_k_with(curve, f, table, t, &df[t]))
        .collect())
}

/// Local operator `[-c(I + ss) + (2I - ss)] f` at a node.
pub fn eval_lambda(
    curve: &PanelizedCurve,
    f: &LineDensity,
    params: &SlenderParams,
    target_index: usize,
) -> Result<Vec3> {
    f.check(&curve.grid)?;
    let (Some(t_hat), Some(ft)) = (curve.tangents.get(target_index), f.samples.get(target_index))
    else {
        return invalid(format!("target index {target_index} out of range"));
    };
    let tangential = t_hat * t_hat.dot(ft);
    let c = params.c();
    let local = match params.form {
        LocalOperatorForm::TwoIdentityMinusDyad => 2.0 * ft - tangential,
        LocalOperatorForm::TwiceProjector => 2.0 * (ft - tangential),
    };
    Ok(-c * (ft + tangential) + local)
}

/// Centerline velocity `u_inf(x) - (Lambda[f] + K[f]) / (8 pi mu)` at every
/// node.
pub fn centerline_velocity(
    curve: &PanelizedCurve,
    f: &LineDensity,
    params: &SlenderParams,
    background: impl Fn(&Vec3) -> Vec3,
    table: &ModifiedWeightTable,
) -> Result<Vec<Vec3>> {
    let k = apply_k(curve, f, table)?;
    let scale = 1.0 / (8.0 * PI * params.mu());
    k.iter()
        .enumerate()
        .map(|(t, kt)| {
            let lambda = eval_lambda(curve, f, params, t)?;
            Ok(background(&curve.positions[t]) - (lambda + kt) * scale)
        })
        .collect()
}
