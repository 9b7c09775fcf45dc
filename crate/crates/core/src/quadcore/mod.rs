//! Panel-based Gauss-Legendre quadrature, Legendre expansions and
//! Vandermonde solvers shared by the operator modules.

mod gauss;
mod legendre;
mod panel;
mod vandermonde;

pub use gauss::{gauss_legendre, QuadratureRule, MAX_ORDER};
pub use legendre::{
    legendre_derivative_coeffs, legendre_eval, legendre_eval_with_derivative, to_legendre,
    Basis, Expansion,
};
pub use panel::{interpolate_to_uniform, panelize, PanelGrid};
pub use vandermonde::{solve_vandermonde, solve_vandermonde_transpose};
