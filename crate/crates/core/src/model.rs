//! Diffusivity, flux potential and reaction models.
//!
//! A diffusivity is admissible when it is positive at both ends of `[0, 1]`
//! and changes sign exactly twice inside, at `alpha < beta`. Every other
//! module assumes this shape, so it is enforced at construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{brent, sign_change_brackets, Polynomial};

const SCAN_INTERVALS: usize = 1000;
const ZERO_XTOL: f64 = 1e-14;
const MIN_SHOCK_RANGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// D decreasing on `[0, alpha]` and increasing on `[beta, 1]`.
    DecreasingIncreasing,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DiffusivityFamily {
    /// `D(u) = (u - a)(u - b - delta u^2)`.
    Cubic { a: f64, b: f64, delta: f64 },
    /// Coefficients from the constant term upwards.
    Polynomial { coeffs: Vec<f64> },
}

impl DiffusivityFamily {
    fn polynomial(&self) -> Polynomial {
        match *self {
            DiffusivityFamily::Cubic { a, b, delta } => {
                Polynomial::new(vec![a * b, -(a + b), 1.0 + a * delta, -delta])
            }
            DiffusivityFamily::Polynomial { ref coeffs } => Polynomial::new(coeffs.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiffusivityModel {
    family: DiffusivityFamily,
    d: Polynomial,
    d1: Polynomial,
    d2: Polynomial,
    d3: Polynomial,
    alpha: f64,
    beta: f64,
    shape: Shape,
}

pub(crate) fn check_density(u: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&u) {
        Ok(u)
    } else {
        Err(Error::Domain(u))
    }
}

/// Interior zeros of the cubic family's quadratic factor `u - b - delta u^2`.
fn quadratic_factor_roots(b: f64, delta: f64) -> Vec<f64> {
    if delta == 0.0 {
        return vec![b];
    }
    let disc = 1.0 - 4.0 * b * delta;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    // the small root, written to avoid cancellation when b * delta is tiny
    let small = 2.0 * b / (1.0 + s);
    let large = (1.0 + s) / (2.0 * delta);
    vec![small, large]
}

impl DiffusivityModel {
    pub fn cubic(a: f64, b: f64, delta: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && delta.is_finite()) {
            return Err(Error::Inadmissible("non-finite parameter".into()));
        }
        Self::build(DiffusivityFamily::Cubic { a, b, delta })
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Inadmissible("non-finite coefficient".into()));
        }
        Self::build(DiffusivityFamily::Polynomial { coeffs })
    }

    pub fn from_family(family: DiffusivityFamily) -> Result<Self> {
        match family {
            DiffusivityFamily::Cubic { a, b, delta } => Self::cubic(a, b, delta),
            DiffusivityFamily::Polynomial { coeffs } => Self::polynomial(coeffs),
        }
    }

    /// A degree-7 diffusivity whose outer branches are not monotone, so
    /// several shocks satisfy the continuous-diffusivity rule.
    ///
    /// Illustrative only: it has the qualitative shape of the oscillatory
    /// example in the literature, not its (unpublished) coefficients.
    pub fn oscillatory_example() -> Self {
        Self::polynomial(vec![
            0.053, -1.706, 25.665, -161.604, 483.124, -731.558, 541.833, -155.213,
        ])
        .expect("built-in example is admissible")
    }

    fn build(family: DiffusivityFamily) -> Result<Self> {
        let d = family.polynomial();
        let (alpha, beta) = locate_zeros(&family, &d)?;
        let d1 = d.derivative();
        let mut model = DiffusivityModel {
            d2: d1.derivative(),
            d3: d1.nth_derivative(2),
            d1,
            d,
            family,
            alpha,
            beta,
            shape: Shape::General,
        };
        model.check_sign_pattern()?;
        model.check_shock_range()?;
        model.shape = model.sample_shape();
        Ok(model)
    }

    fn check_sign_pattern(&self) -> Result<()> {
        for k in 1..SCAN_INTERVALS {
            let u = k as f64 / SCAN_INTERVALS as f64;
            let v = self.d.eval(u);
            let inside = u > self.alpha && u < self.beta;
            let wrong = if inside { v >= 0.0 } else { v <= 0.0 };
            // samples within a rounding distance of a zero are not informative
            let near_zero = (u - self.alpha).abs() < 1e-9 || (u - self.beta).abs() < 1e-9;
            if wrong && !near_zero {
                return Err(Error::Inadmissible(format!(
                    "D({u}) = {v:e} has the wrong sign for zeros ({}, {})",
                    self.alpha, self.beta
                )));
            }
        }
        Ok(())
    }

    // Every Phi_S in [Phi(beta), Phi(alpha)] must have an endpoint on both
    // outer branches, which needs Phi(beta) >= Phi(0) and Phi(1) >= Phi(alpha).
    fn check_shock_range(&self) -> Result<()> {
        let phi = self.d.antiderivative();
        let (pa, pb) = (phi.eval(self.alpha), phi.eval(self.beta));
        if pa - pb < MIN_SHOCK_RANGE {
            return Err(Error::IllConditioned(pa - pb));
        }
        if pb < 0.0 {
            return Err(Error::Inadmissible(format!(
                "Phi(beta) = {pb:e} < Phi(0): lower-knee shock has no left endpoint"
            )));
        }
        let p1 = phi.eval(1.0);
        if p1 < pa {
            return Err(Error::Inadmissible(format!(
                "Phi(1) = {p1:e} < Phi(alpha) = {pa:e}: upper-knee shock has no right endpoint"
            )));
        }
        Ok(())
    }

    fn sample_shape(&self) -> Shape {
        let monotone = (0..=SCAN_INTERVALS).all(|k| {
            let u = k as f64 / SCAN_INTERVALS as f64;
            let slope = self.d1.eval(u);
            if u <= self.alpha {
                slope <= 0.0
            } else if u >= self.beta {
                slope >= 0.0
            } else {
                true
            }
        });
        if monotone {
            Shape::DecreasingIncreasing
        } else {
            Shape::General
        }
    }

    pub fn family(&self) -> &DiffusivityFamily {
        &self.family
    }

    pub fn polynomial_form(&self) -> &Polynomial {
        &self.d
    }

    /// `D(u)`, rejecting densities outside `[0, 1]`.
    pub fn eval_diffusivity(&self, u: f64) -> Result<f64> {
        Ok(self.eval(check_density(u)?))
    }

    /// `D(u)` without the domain check; used by solvers that may overshoot.
    pub fn eval(&self, u: f64) -> f64 {
        match self.family {
            DiffusivityFamily::Cubic { a, b, delta } => (u - a) * (u - b - delta * u * u),
            DiffusivityFamily::Polynomial { .. } => self.d.eval(u),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.d1.eval(u)
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        self.d2.eval(u)
    }

    pub fn third_derivative(&self, u: f64) -> f64 {
        self.d3.eval(u)
    }

    /// The interior zeros `(alpha, beta)`, located at construction.
    pub fn find_diffusivity_zeros(&self) -> (f64, f64) {
        (self.alpha, self.beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn classify_shape(&self) -> Shape {
        self.shape
    }
}

fn locate_zeros(family: &DiffusivityFamily, d: &Polynomial) -> Result<(f64, f64)> {
    let (d0, d1) = (d.eval(0.0), d.eval(1.0));
    if d0 <= 0.0 || d1 <= 0.0 {
        return Err(Error::Inadmissible(format!(
            "D must be positive at both ends (D(0) = {d0:e}, D(1) = {d1:e})"
        )));
    }
    let brackets = sign_change_brackets(|u| d.eval(u), 0.0, 1.0, SCAN_INTERVALS);
    if brackets.len() != 2 {
        return Err(Error::Inadmissible(format!(
            "expected 2 interior sign changes of D, found {}",
            brackets.len()
        )));
    }
    let mut zeros = [0.0; 2];
    for (z, &(lo, hi)) in zeros.iter_mut().zip(&brackets) {
        *z = brent(|u| d.eval(u), lo, hi, ZERO_XTOL)?;
    }

    // For the cubic family the factored form gives the zeros directly; the
    // scan is kept as an independent check on them.
    if let DiffusivityFamily::Cubic { a, b, delta } = *family {
        let mut exact: Vec<f64> = quadratic_factor_roots(b, delta)
            .into_iter()
            .chain(std::iter::once(a))
            .filter(|&r| r > 0.0 && r < 1.0)
            .collect();
        exact.sort_by(f64::total_cmp);
        if exact.len() == 2 && exact.iter().zip(&zeros).all(|(e, z)| (e - z).abs() < 1e-9) {
            zeros = [exact[0], exact[1]];
        }
    }
    Ok((zeros[0], zeros[1]))
}

/// Flux potential `Phi(u) = int_0^u D`, so `Phi(0) = 0`.
#[derive(Debug, Clone)]
pub struct PotentialModel {
    diffusivity: DiffusivityModel,
    phi: Polynomial,
}

impl PotentialModel {
    pub fn new(diffusivity: DiffusivityModel) -> Self {
        let phi = diffusivity.polynomial_form().antiderivative();
        PotentialModel { diffusivity, phi }
    }

    pub fn cubic(a: f64, b: f64, delta: f64) -> Result<Self> {
        Ok(Self::new(DiffusivityModel::cubic(a, b, delta)?))
    }

    pub fn diffusivity(&self) -> &DiffusivityModel {
        &self.diffusivity
    }

    pub fn polynomial_form(&self) -> &Polynomial {
        &self.phi
    }

    pub fn eval_potential(&self, u: f64) -> Result<f64> {
        Ok(self.eval(check_density(u)?))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self.diffusivity.family() {
            DiffusivityFamily::Cubic { a, b, delta } => {
                u * (-3.0 * delta * u.powi(3) + 4.0 * a * delta * u * u + 4.0 * u * u
                    - 6.0 * a * u
                    - 6.0 * b * u
                    + 12.0 * a * b)
                    / 12.0
            }
            DiffusivityFamily::Polynomial { .. } => self.phi.eval(u),
        }
    }

    pub fn d(&self, u: f64) -> f64 {
        self.diffusivity.eval(u)
    }

    pub fn alpha(&self) -> f64 {
        self.diffusivity.alpha()
    }

    pub fn beta(&self) -> f64 {
        self.diffusivity.beta()
    }

    /// `(Phi(beta), Phi(alpha))`, the range of admissible shock potentials.
    pub fn shock_range(&self) -> (f64, f64) {
        (self.eval(self.beta()), self.eval(self.alpha()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ReactionModel {
    Zero,
    /// `R(u) = u (1 - u)(u - gamma)`.
    Cubic {
        gamma: f64,
    },
}

impl ReactionModel {
    pub fn cubic(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma < 1.0 {
            Ok(ReactionModel::Cubic { gamma })
        } else {
            Err(Error::Inadmissible(format!(
                "reaction threshold gamma = {gamma} must lie in (0, 1)"
            )))
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ReactionModel::Zero)
    }

    pub fn eval_reaction(&self, u: f64) -> Result<f64> {
        Ok(self.eval(check_density(u)?))
    }

    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            ReactionModel::Zero => 0.0,
            ReactionModel::Cubic { gamma } => u * (1.0 - u) * (u - gamma),
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        match *self {
            ReactionModel::Zero => 0.0,
            // d/du of -u^3 + (1 + gamma) u^2 - gamma u
            ReactionModel::Cubic { gamma } => -3.0 * u * u + 2.0 * (1.0 + gamma) * u - gamma,
        }
    }
}
