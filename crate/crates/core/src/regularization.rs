//! Weights for the nonlinear fourth-order regularisation and the modified
//! equal-area rules they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PotentialModel;
use crate::numeric::{brent, integrate, Polynomial};
use crate::shock::{solve_area_rule, weighted_area, ShockPosition, ShockRule, AREA_TOL};

const POSITIVITY_SAMPLES: usize = 1000;
const A_LIMIT: f64 = 200.0;
const A_XTOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-10;
const ZERO_RESIDUAL: f64 = 1e-15;

/// A positive weight `f(u)` on `[0, 1]`.
pub trait Weight {
    fn eval(&self, u: f64) -> f64;
    fn derivative(&self, u: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightFamily {
    Constant,
    /// `f(u) = exp(-A u)`.
    Exponential,
    /// `f(u) = 1 + A u^2`.
    Quadratic,
}

impl WeightFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeightFamily::Constant => "constant",
            WeightFamily::Exponential => "exponential",
            WeightFamily::Quadratic => "quadratic",
        }
    }
}

impl std::str::FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(WeightFamily::Constant),
            "exponential" => Ok(WeightFamily::Exponential),
            "quadratic" => Ok(WeightFamily::Quadratic),
            other => Err(Error::Config(format!("unknown weight family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularisationWeight {
    pub family: WeightFamily,
    #[serde(rename = "A")]
    pub a: f64,
}

impl RegularisationWeight {
    /// Builds the weight, rejecting parameters that make `f` non-positive
    /// somewhere on `[0, 1]`.
    pub fn new(family: WeightFamily, a: f64) -> Result<Self> {
        let w = RegularisationWeight { family, a };
        check_positive(&w, 0.0, 1.0)?;
        Ok(w)
    }

    pub fn constant() -> Self {
        RegularisationWeight {
            family: WeightFamily::Constant,
            a: 0.0,
        }
    }

    pub fn exponential(a: f64) -> Result<Self> {
        Self::new(WeightFamily::Exponential, a)
    }

    pub fn quadratic(a: f64) -> Result<Self> {
        Self::new(WeightFamily::Quadratic, a)
    }
}

impl Weight for RegularisationWeight {
    fn eval(&self, u: f64) -> f64 {
        match self.family {
            WeightFamily::Constant => 1.0,
            WeightFamily::Exponential => (-self.a * u).exp(),
            WeightFamily::Quadratic => 1.0 + self.a * u * u,
        }
    }

    fn derivative(&self, u: f64) -> f64 {
        match self.family {
            WeightFamily::Constant => 0.0,
            WeightFamily::Exponential => -self.a * (-self.a * u).exp(),
            WeightFamily::Quadratic => 2.0 * self.a * u,
        }
    }
}

/// Any polynomial, e.g. `f(u) = u` for the derivative-weighted rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialWeight {
    f: Polynomial,
    df: Polynomial,
}

impl PolynomialWeight {
    pub fn new(f: Polynomial) -> Self {
        let df = f.derivative();
        PolynomialWeight { f, df }
    }
}

impl Weight for PolynomialWeight {
    fn eval(&self, u: f64) -> f64 {
        self.f.eval(u)
    }

    fn derivative(&self, u: f64) -> f64 {
        self.df.eval(u)
    }
}

fn check_sampled<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64) -> Result<()> {
    for k in 0..=POSITIVITY_SAMPLES {
        let u = lo + (hi - lo) * k as f64 / POSITIVITY_SAMPLES as f64;
        let v = g(u);
        if !(v > 0.0) {
            return Err(Error::NonPositiveWeight { u, value: v });
        }
    }
    Ok(())
}

pub fn check_positive<W: Weight + ?Sized>(w: &W, lo: f64, hi: f64) -> Result<()> {
    check_sampled(|u| w.eval(u), lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationMethod {
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModifiedAreaResidual {
    pub shock: ShockPosition,
    pub weight: RegularisationWeight,
    pub value: f64,
    pub method: EvaluationMethod,
}

/// `int_{u_l}^{u_r} (Phi(u) - Phi_S) / f(u) du` by adaptive quadrature.
pub fn modified_area_integral<W: Weight + ?Sized>(
    model: &PotentialModel,
    shock: &ShockPosition,
    f: &W,
) -> Result<f64> {
    check_positive(f, shock.u_left, shock.u_right)?;
    weighted_area(model, shock.u_left, shock.u_right, shock.phi_s, |u| {
        1.0 / f.eval(u)
    })
}

/// The exponential-weight integral `int (Phi - Phi_S) e^{A u} du` in closed
/// form, from repeated integration by parts:
/// `e^{A u} sum_i (-1)^i P^(i)(u) / A^(i+1)` with `P = Phi - Phi_S`.
///
/// When `|A|` times the half-width is small the alternating sum cancels
/// catastrophically, so the same integral is taken from the Taylor series of
/// the exponential about the midpoint, term by term exactly. `A = 0` is the
/// plain equal-area integral.
pub fn modified_area_closed_form_exponential(
    model: &PotentialModel,
    shock: &ShockPosition,
    a: f64,
) -> f64 {
    let p = model.polynomial_form().shifted(-shock.phi_s);
    let (l, r) = (shock.u_left, shock.u_right);
    let half = 0.5 * (r - l);
    if a.abs() * half <= 2.0 {
        return exp_moment_series(&p, l, r, a);
    }
    let boundary = |u: f64| -> f64 {
        let mut sum = 0.0;
        let mut deriv = p.clone();
        let mut scale = 1.0 / a;
        for i in 0..=p.degree() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * deriv.eval(u) * scale;
            deriv = deriv.derivative();
            scale /= a;
        }
        sum
    };
    // factor out the larger exponential to keep the difference finite
    let shift = if a > 0.0 { r } else { l };
    (a * shift).exp()
        * ((a * (r - shift)).exp() * boundary(r) - (a * (l - shift)).exp() * boundary(l))
}

// int_l^r P(u) e^{A u} du = e^{A c} sum_m A^m / m! int_{-h}^{h} P(c + s) s^m ds
fn exp_moment_series(p: &Polynomial, l: f64, r: f64, a: f64) -> f64 {
    let c = 0.5 * (l + r);
    let h = 0.5 * (r - l);
    // Taylor coefficients of P about c
    let mut shifted = Vec::with_capacity(p.degree() + 1);
    let mut deriv = p.clone();
    let mut fact = 1.0;
    for k in 0..=p.degree() {
        if k > 0 {
            fact *= k as f64;
        }
        shifted.push(deriv.eval(c) / fact);
        deriv = deriv.derivative();
    }
    let moment = |m: usize| -> f64 {
        shifted
            .iter()
            .enumerate()
            .filter(|(j, _)| (j + m).is_multiple_of(2))
            .map(|(j, &q)| {
                let k = (j + m + 1) as i32;
                2.0 * q * h.powi(k) / k as f64
            })
            .sum()
    };
    let mut total = 0.0;
    let mut coef = 1.0; // A^m / m!
    for m in 0..200 {
        let term = coef * moment(m);
        total += term;
        if m > p.degree() && term.abs() <= 1e-18 * total.abs().max(1e-300) {
            break;
        }
        coef *= a / (m + 1) as f64;
    }
    (a * c).exp() * total
}

/// Residual of the modified rule, from the closed form when it applies.
pub fn modified_area_residual(
    model: &PotentialModel,
    shock: &ShockPosition,
    weight: &RegularisationWeight,
) -> Result<ModifiedAreaResidual> {
    let (value, method) = match weight.family {
        WeightFamily::Exponential => (
            modified_area_closed_form_exponential(model, shock, weight.a),
            EvaluationMethod::ClosedForm,
        ),
        _ => (
            modified_area_integral(model, shock, weight)?,
            EvaluationMethod::Quadrature,
        ),
    };
    Ok(ModifiedAreaResidual {
        shock: *shock,
        weight: *weight,
        value,
        method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSolution {
    pub weight: RegularisationWeight,
    /// Closed-form residual for the exponential family, quadrature otherwise.
    pub residual: f64,
    /// Independent quadrature residual at the solved parameter.
    pub quadrature_residual: f64,
    /// Sign changes of the residual seen on the scan grid.
    pub sign_changes: usize,
}

fn scan_grid(family: WeightFamily) -> (Vec<f64>, Vec<f64>) {
    let mut positive = Vec::new();
    let mut x = 0.5;
    while x < A_LIMIT {
        positive.push(x);
        x *= 2.0;
    }
    positive.push(A_LIMIT);
    let negative = match family {
        // 1 + A u^2 > 0 on [0, 1] needs A > -1
        WeightFamily::Quadratic => vec![-0.5, -0.9, -0.99, -0.999],
        _ => positive.iter().map(|x| -x).collect(),
    };
    (positive, negative)
}

/// Finds `A` so that the given shock satisfies the modified equal-area rule
/// for the chosen weight family.
///
/// Brackets come from an outward scan of `G(A)`; the residual curve is
/// returned inside the error when no sign change exists for `|A| <= 200`.
pub fn solve_weight_parameter(
    model: &PotentialModel,
    shock: &ShockPosition,
    family: WeightFamily,
) -> Result<WeightSolution> {
    if family == WeightFamily::Constant {
        return Err(Error::Config(
            "the constant weight has no parameter to solve for".into(),
        ));
    }
    let d = model.diffusivity();
    let (dl, dr) = (d.eval(shock.u_left), d.eval(shock.u_right));
    if !(dl > 0.0 && dr > 0.0) {
        return Err(Error::Inadmissible(format!(
            "D must be positive at both shock endpoints (D(u_l) = {dl:e}, D(u_r) = {dr:e})"
        )));
    }
    let g = |a: f64| -> f64 {
        modified_area_residual(model, shock, &RegularisationWeight { family, a })
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };

    let g0 = g(0.0);
    let (positive, negative) = scan_grid(family);
    let mut curve = vec![(0.0, g0)];
    let mut brackets = Vec::new();
    // the constant weight already selects the shock up to roundoff
    if g0.abs() <= ZERO_RESIDUAL {
        brackets.push((0.0, 0.0));
    }
    for side in [&positive, &negative] {
        let mut prev = (0.0, g0);
        for &a in side.iter() {
            let v = g(a);
            curve.push((a, v));
            if prev.1.abs() > ZERO_RESIDUAL
                && v.is_finite()
                && (v == 0.0 || (v > 0.0) != (prev.1 > 0.0))
            {
                brackets.push((prev.0, a));
            }
            prev = (a, v);
        }
    }
    curve.sort_by(|x, y| x.0.total_cmp(&y.0));
    let sign_changes = brackets.len();
    // nearest bracket to A = 0 first
    brackets.sort_by(|x, y| {
        x.0.abs()
            .max(x.1.abs())
            .total_cmp(&y.0.abs().max(y.1.abs()))
    });
    let Some(&(lo, hi)) = brackets.first() else {
        return Err(Error::NoWeightBracket {
            limit: A_LIMIT,
            curve,
        });
    };
    let a = if lo == hi {
        lo
    } else {
        brent(g, lo, hi, A_XTOL)?
    };
    let weight = RegularisationWeight::new(family, a)?;
    let residual = g(a);
    if !(residual.abs() <= RESIDUAL_TOL) {
        return Err(Error::RootIterationLimit(a));
    }
    Ok(WeightSolution {
        weight,
        residual,
        quadrature_residual: modified_area_integral(model, shock, &weight)?,
        sign_changes,
    })
}

/// The shock selected by the modified equal-area rule with weight `f`.
pub fn shock_for_weight<W: Weight + ?Sized>(
    model: &PotentialModel,
    f: &W,
) -> Result<ShockPosition> {
    check_positive(f, 0.0, 1.0)?;
    solve_area_rule(model, |u| 1.0 / f.eval(u), ShockRule::Custom)
}

/// `Psi(u) = int_0^u D / f`, the flux-weighted potential.
fn flux_weighted_potential<W: Weight + ?Sized>(
    model: &PotentialModel,
    f: &W,
    u: f64,
) -> Result<f64> {
    integrate(|s| model.d(s) / f.eval(s), 0.0, u, 1e-14)
}

/// Equal-area residual of the flux-weighted potential `Psi = int D / f`:
/// `int_{u_l}^{u_r} (Psi(u) - Psi_S) du` with `Psi_S` the mean of the two
/// endpoint values. The regularisation `-(eps^2 f u_xxx)_x` selects shocks
/// where this vanishes and `Psi` (not `Phi`) is continuous.
pub fn alt_rule_flux_weighted<W: Weight + ?Sized>(
    model: &PotentialModel,
    shock: &ShockPosition,
    f: &W,
) -> Result<f64> {
    check_positive(f, shock.u_left, shock.u_right)?;
    let psi_l = flux_weighted_potential(model, f, shock.u_left)?;
    let psi_r = flux_weighted_potential(model, f, shock.u_right)?;
    let psi_s = 0.5 * (psi_l + psi_r);
    // Psi(u) = Psi(u_l) + int_{u_l}^u D/f, integrated from the left endpoint
    let mut inner_err = None;
    let value = integrate(
        |u| match integrate(|s| model.d(s) / f.eval(s), shock.u_left, u, 1e-15) {
            Ok(v) => psi_l + v - psi_s,
            Err(e) => {
                inner_err.get_or_insert(e);
                f64::NAN
            }
        },
        shock.u_left,
        shock.u_right,
        AREA_TOL,
    )?;
    match inner_err {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// Jump `Psi(u_r) - Psi(u_l)` of the flux-weighted potential.
pub fn flux_weighted_jump<W: Weight + ?Sized>(
    model: &PotentialModel,
    shock: &ShockPosition,
    f: &W,
) -> Result<f64> {
    check_positive(f, shock.u_left, shock.u_right)?;
    integrate(
        |s| model.d(s) / f.eval(s),
        shock.u_left,
        shock.u_right,
        AREA_TOL,
    )
}

/// `int_{u_l}^{u_r} f'(u) (Phi(u) - Phi_S) du`, the rule selected by
/// `-eps^2 f(u)_xxxx`; needs both `f` and `f'` positive on the shock.
pub fn alt_rule_fprime_weighted<W: Weight + ?Sized>(
    model: &PotentialModel,
    shock: &ShockPosition,
    f: &W,
) -> Result<f64> {
    check_positive(f, shock.u_left, shock.u_right)?;
    check_sampled(|u| f.derivative(u), shock.u_left, shock.u_right)?;
    weighted_area(model, shock.u_left, shock.u_right, shock.phi_s, |u| {
        f.derivative(u)
    })
}
