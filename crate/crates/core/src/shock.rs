//! Shock positions and the rules that select them.
//!
//! A shock jumps between `u_left` in `[0, alpha]` and `u_right` in
//! `[beta, 1]` at a common potential `Phi_S`. On these outer branches `Phi`
//! is strictly increasing, so each endpoint is a single bracketed inverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PotentialModel, Shape};
use crate::numeric::{brent, integrate, sign_change_brackets};

/// Absolute tolerance for the area integrals.
pub const AREA_TOL: f64 = 1e-12;
const PHI_XTOL: f64 = 1e-16;
const U_XTOL: f64 = 1e-15;
const SCAN_INTERVALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShockRule {
    EqualArea,
    ContinuousDiffusivity,
    LowerKnee,
    UpperKnee,
    Custom,
}

impl ShockRule {
    pub fn name(self) -> &'static str {
        match self {
            ShockRule::EqualArea => "equal-area",
            ShockRule::ContinuousDiffusivity => "continuous-d",
            ShockRule::LowerKnee => "lower-knee",
            ShockRule::UpperKnee => "upper-knee",
            ShockRule::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockPosition {
    pub u_left: f64,
    pub u_right: f64,
    pub phi_s: f64,
    pub rule: ShockRule,
}

impl ShockPosition {
    pub fn length(&self) -> f64 {
        self.u_right - self.u_left
    }

    /// Checks continuity of `Phi` across the shock and the endpoint ordering.
    pub fn validate(&self, model: &PotentialModel) -> Result<()> {
        let (lo, hi) = model.shock_range();
        let gap_l = (model.eval(self.u_left) - self.phi_s).abs();
        let gap_r = (model.eval(self.u_right) - self.phi_s).abs();
        if gap_l > 1e-10 || gap_r > 1e-10 {
            return Err(Error::Inadmissible(format!(
                "Phi is discontinuous across the shock ({gap_l:e}, {gap_r:e})"
            )));
        }
        if self.u_left > model.alpha() || self.u_right < model.beta() {
            return Err(Error::Inadmissible(format!(
                "endpoints ({}, {}) straddle the wrong zeros",
                self.u_left, self.u_right
            )));
        }
        let slack = 1e-12 * (hi - lo);
        if self.phi_s < lo - slack || self.phi_s > hi + slack {
            return Err(Error::PotentialOutOfRange {
                phi_s: self.phi_s,
                lower: lo,
                upper: hi,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthExtremum {
    pub phi_s: f64,
    pub length: f64,
    pub second_derivative: f64,
    pub kind: ExtremumKind,
}

/// Every continuous-diffusivity shock of a model; `longest` indexes the one
/// with maximal length.
#[derive(Debug, Clone)]
pub struct ContinuousDiffusivityShocks {
    pub shocks: Vec<ShockPosition>,
    pub longest: usize,
}

/// The one-parameter family of shocks indexed by `Phi_S`.
#[derive(Debug, Clone, Copy)]
pub struct ShockFamily<'a> {
    model: &'a PotentialModel,
}

impl<'a> ShockFamily<'a> {
    pub fn new(model: &'a PotentialModel) -> Self {
        ShockFamily { model }
    }

    pub fn model(&self) -> &'a PotentialModel {
        self.model
    }

    /// `(Phi(beta), Phi(alpha))`.
    pub fn range(&self) -> (f64, f64) {
        self.model.shock_range()
    }

    fn check_range(&self, phi_s: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        let slack = 1e-12 * (hi - lo);
        if !(phi_s >= lo - slack && phi_s <= hi + slack) {
            return Err(Error::PotentialOutOfRange {
                phi_s,
                lower: lo,
                upper: hi,
            });
        }
        Ok(phi_s.clamp(lo, hi))
    }

    /// Solves `Phi(u) = Phi_S` on `[0, alpha]` and on `[beta, 1]`.
    pub fn endpoints_for_phi(&self, phi_s: f64) -> Result<(f64, f64)> {
        let phi_s = self.check_range(phi_s)?;
        let m = self.model;
        let (lo, hi) = self.range();
        let g = |u: f64| m.eval(u) - phi_s;
        let u_left = if phi_s == hi {
            m.alpha()
        } else {
            brent(g, 0.0, m.alpha(), U_XTOL)?
        };
        let u_right = if phi_s == lo {
            m.beta()
        } else {
            brent(g, m.beta(), 1.0, U_XTOL)?
        };
        Ok((u_left, u_right))
    }

    pub fn shock(&self, phi_s: f64, rule: ShockRule) -> Result<ShockPosition> {
        let (u_left, u_right) = self.endpoints_for_phi(phi_s)?;
        Ok(ShockPosition {
            u_left,
            u_right,
            phi_s: phi_s.clamp(self.range().0, self.range().1),
            rule,
        })
    }

    pub fn shock_length(&self, phi_s: f64) -> Result<f64> {
        let (l, r) = self.endpoints_for_phi(phi_s)?;
        Ok(r - l)
    }

    /// `dS_L/dPhi_S = 1/D(u_r) - 1/D(u_l)`; infinite at the knees, where an
    /// endpoint sits on a zero of `D`.
    pub fn shock_length_derivative(&self, phi_s: f64) -> Result<f64> {
        let (l, r) = self.endpoints_for_phi(phi_s)?;
        let d = self.model.diffusivity();
        Ok(1.0 / d.eval(r) - 1.0 / d.eval(l))
    }

    pub fn shock_length_second_derivative(&self, phi_s: f64) -> Result<f64> {
        let (l, r) = self.endpoints_for_phi(phi_s)?;
        let d = self.model.diffusivity();
        Ok(d.derivative(l) / d.eval(l).powi(3) - d.derivative(r) / d.eval(r).powi(3))
    }

    /// `D(u_r) - D(u_l)`, negative at the lower knee and positive at the upper.
    pub fn diffusivity_jump(&self, phi_s: f64) -> Result<f64> {
        let (l, r) = self.endpoints_for_phi(phi_s)?;
        let d = self.model.diffusivity();
        Ok(d.eval(r) - d.eval(l))
    }

    fn jump_roots(&self) -> Result<Vec<f64>> {
        let (lo, hi) = self.range();
        let g = |p: f64| self.diffusivity_jump(p).unwrap_or(f64::NAN);
        let brackets = if self.model.diffusivity().classify_shape() == Shape::DecreasingIncreasing {
            vec![(lo, hi)]
        } else {
            sign_change_brackets(g, lo, hi, SCAN_INTERVALS)
        };
        brackets
            .into_iter()
            .map(|(a, b)| brent(g, a, b, PHI_XTOL))
            .collect()
    }
}

/// `int_{u_l}^{u_r} (Phi(u) - Phi_S) / f(u) du` by adaptive quadrature.
///
/// Shared by the plain and the modified equal-area rules so that the
/// constant weight reproduces the plain rule exactly.
pub(crate) fn weighted_area<W>(
    model: &PotentialModel,
    u_left: f64,
    u_right: f64,
    phi_s: f64,
    inv_weight: W,
) -> Result<f64>
where
    W: Fn(f64) -> f64,
{
    // Phi - Phi_S cancels, leaving noise of order eps |Phi| / f in every
    // sample; with steep weights that exceeds AREA_TOL, so the tolerance
    // follows the integral of that noise.
    let noise = integrate(
        |u| (model.eval(u).abs() + phi_s.abs()) * inv_weight(u).abs(),
        u_left,
        u_right,
        1e-3 * AREA_TOL,
    )
    .unwrap_or(0.0);
    integrate(
        |u| (model.eval(u) - phi_s) * inv_weight(u),
        u_left,
        u_right,
        AREA_TOL.max(64.0 * f64::EPSILON * noise),
    )
}

/// `int_{u_l}^{u_r} (Phi - Phi_S) du` from the exact antiderivative of `Phi`.
pub fn equal_area_residual_exact(model: &PotentialModel, shock: &ShockPosition) -> f64 {
    let psi = model.polynomial_form().antiderivative();
    psi.eval(shock.u_right) - psi.eval(shock.u_left) - shock.phi_s * shock.length()
}

pub fn equal_area_residual(model: &PotentialModel, shock: &ShockPosition) -> Result<f64> {
    weighted_area(model, shock.u_left, shock.u_right, shock.phi_s, |_| 1.0)
}

/// Root in `Phi_S` of an area residual that is positive at the lower knee
/// and negative at the upper knee.
pub(crate) fn solve_area_rule<W>(
    model: &PotentialModel,
    inv_weight: W,
    rule: ShockRule,
) -> Result<ShockPosition>
where
    W: Fn(f64) -> f64,
{
    let family = ShockFamily::new(model);
    let (lo, hi) = family.range();
    let residual = |p: f64| -> f64 {
        family
            .endpoints_for_phi(p)
            .and_then(|(l, r)| weighted_area(model, l, r, p, &inv_weight))
            .unwrap_or(f64::NAN)
    };
    let phi_s = brent(residual, lo, hi, PHI_XTOL)?;
    family.shock(phi_s, rule)
}

pub fn equal_area_shock(model: &PotentialModel) -> Result<ShockPosition> {
    solve_area_rule(model, |_| 1.0, ShockRule::EqualArea)
}

/// All shocks with `D(u_l) = D(u_r)`. Decreasing-increasing models have
/// exactly one; general models are scanned for every sign change.
pub fn continuous_diffusivity_shocks(
    model: &PotentialModel,
) -> Result<ContinuousDiffusivityShocks> {
    let family = ShockFamily::new(model);
    let shocks = family
        .jump_roots()?
        .into_iter()
        .map(|p| family.shock(p, ShockRule::ContinuousDiffusivity))
        .collect::<Result<Vec<_>>>()?;
    let longest = shocks
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.length().total_cmp(&b.1.length()))
        .map(|(i, _)| i)
        .ok_or(Error::NoBracket {
            lo: family.range().0,
            hi: family.range().1,
            f_lo: f64::NAN,
            f_hi: f64::NAN,
        })?;
    Ok(ContinuousDiffusivityShocks { shocks, longest })
}

/// The longest continuous-diffusivity shock.
pub fn continuous_diffusivity_shock(model: &PotentialModel) -> Result<ShockPosition> {
    let all = continuous_diffusivity_shocks(model)?;
    Ok(all.shocks[all.longest])
}

/// `(lower, upper)`: the lower knee lands on `beta`, the upper leaves `alpha`.
pub fn knee_shocks(model: &PotentialModel) -> Result<(ShockPosition, ShockPosition)> {
    let family = ShockFamily::new(model);
    let (lo, hi) = family.range();
    Ok((
        family.shock(lo, ShockRule::LowerKnee)?,
        family.shock(hi, ShockRule::UpperKnee)?,
    ))
}

/// Critical points of the shock length, classified by its second derivative.
///
/// Interior critical points coincide with continuous-diffusivity shocks
/// because `S_L' = (D(u_l) - D(u_r)) / (D(u_l) D(u_r))`.
pub fn shock_length_extrema(model: &PotentialModel) -> Result<Vec<LengthExtremum>> {
    let family = ShockFamily::new(model);
    family
        .jump_roots()?
        .into_iter()
        .map(|p| {
            let s2 = family.shock_length_second_derivative(p)?;
            let kind = if s2 < 0.0 {
                ExtremumKind::Maximum
            } else if s2 > 0.0 {
                ExtremumKind::Minimum
            } else {
                ExtremumKind::Degenerate
            };
            Ok(LengthExtremum {
                phi_s: p,
                length: family.shock_length(p)?,
                second_derivative: s2,
                kind,
            })
        })
        .collect()
}
