use std::ops::{Add, Mul, Sub};

use super::gauss::QuadratureRule;
use crate::error::{invalid, Result};

/// Polynomial basis of an [`Expansion`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Legendre polynomials `P_k(eta)`.
    Legendre,
    /// Monomials `eta^k`.
    Monomial,
}

/// Coefficients of a polynomial on the reference interval [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub basis: Basis,
    pub coeffs: Vec<f64>,
}

/// Scalars the polynomial evaluators accept: `f64` and `Complex64`.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + From<f64>
{
}

impl<T> Scalar for T where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + From<f64>
{
}

impl Expansion {
    pub fn legendre(coeffs: Vec<f64>) -> Self {
        Self {
            basis: Basis::Legendre,
            coeffs,
        }
    }

    pub fn monomial(coeffs: Vec<f64>) -> Self {
        Self {
            basis: Basis::Monomial,
            coeffs,
        }
    }

    pub fn eval<T: Scalar>(&self, eta: T) -> T {
        match self.basis {
            Basis::Legendre => legendre_eval(&self.coeffs, eta),
            Basis::Monomial => self
                .coeffs
                .iter()
                .rev()
                .fold(T::from(0.0), |acc, &c| acc * eta + T::from(c)),
        }
    }

    /// Derivative with respect to `eta`, in the same basis.
    pub fn derivative(&self) -> Expansion {
        match self.basis {
            Basis::Legendre => Expansion::legendre(legendre_derivative_coeffs(&self.coeffs)),
            Basis::Monomial => {
                let n = self.coeffs.len();
                let mut d: Vec<f64> = (1..n).map(|k| k as f64 * self.coeffs[k]).collect();
                d.push(0.0);
                d.truncate(n.max(1));
                Expansion::monomial(d)
            }
        }
    }
}

/// Legendre coefficients of the polynomial interpolating `samples` at the
/// nodes of `rule`.
///
/// The `n`-point Gauss rule integrates `P_j P_k` exactly for `j, k < n`, so
/// the discrete projection is the exact interpolant.
pub fn to_legendre(samples: &[f64], rule: &QuadratureRule) -> Result<Expansion> {
    let n = rule.order();
    if samples.len() != n {
        return invalid(format!(
            "expected {n} samples for a rule of order {n}, got {}",
            samples.len()
        ));
    }
    let w = rule.weights();
    let mut coeffs = vec![0.0; n];
    for (l, &value) in samples.iter().enumerate() {
        let wv = w[l] * value;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c += wv * rule.legendre_at_node(l, k);
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= (2 * k + 1) as f64 / 2.0;
    }
    Ok(Expansion::legendre(coeffs))
}

/// `sum_k coeffs[k] P_k(eta)` by the three-term recurrence.
pub fn legendre_eval<T: Scalar>(coeffs: &[f64], eta: T) -> T {
    legendre_eval_with_derivative(coeffs, eta).0
}

/// Value and `eta`-derivative of a Legendre series.
pub fn legendre_eval_with_derivative<T: Scalar>(coeffs: &[f64], eta: T) -> (T, T) {
    let zero = T::from(0.0);
    let Some(&c0) = coeffs.first() else {
        return (zero, zero);
    };
    let mut value = T::from(c0);
    let mut deriv = zero;
    let (mut p_prev, mut p) = (T::from(1.0), eta);
    let (mut dp_prev, mut dp) = (zero, T::from(1.0));
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        value = value + T::from(c) * p;
        deriv = deriv + T::from(c) * dp;
        let kf = k as f64;
        let p_next =
            (T::from(2.0 * kf + 1.0) * eta * p - T::from(kf) * p_prev) * T::from(1.0 / (kf + 1.0));
        // P'_{k+1} = P'_{k-1} + (2k + 1) P_k
        let dp_next = dp_prev + T::from(2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (value, deriv)
}

/// Legendre coefficients of the derivative of a Legendre series.
pub fn legendre_derivative_coeffs(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut d = vec![0.0; n];
    // d_j = (2j + 1) (c_{j+1} + c_{j+3} + ...)
    let mut tail = [0.0f64; 2];
    for j in (0..n.saturating_sub(1)).rev() {
        let t = coeffs[j + 1] + tail[j % 2];
        tail[j % 2] = t;
        d[j] = (2 * j + 1) as f64 * t;
    }
    d
}
