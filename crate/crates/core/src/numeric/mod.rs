//! Numerical building blocks: polynomials, bracketed root finding,
//! adaptive quadrature, explicit and linearly implicit ODE integrators.

pub mod banded;
pub mod ode;
pub mod poly;
pub mod quad;
pub mod roots;
pub mod stiff;

pub use poly::Polynomial;
pub use quad::integrate;
pub use roots::{brent, sign_change_brackets};
