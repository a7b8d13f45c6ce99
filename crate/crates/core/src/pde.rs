//! Method-of-lines simulator for
//!
//! ```text
//! u_t = [Phi(u) - eps^2 f(u) u_xx]_xx + R(u)
//! ```
//!
//! on a uniform grid `x_i = x_min + i dx`, `i = 0..=N`, with Dirichlet
//! values at both ends and `u_x = 0` imposed through mirrored ghost nodes
//! `u_{-1} = u_1`, `u_{N+1} = u_{N-1}`. The unknowns are the interior
//! values `u_1..u_{N-1}`; every right-hand side touches at most two
//! neighbours on each side, so the Jacobian is pentadiagonal.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PotentialModel, ReactionModel};
use crate::numeric::ode::{dopri5, Dopri5Options};
use crate::numeric::stiff::{ode23s, StiffOptions};
use crate::output::{fmt17, row, write_file};
use crate::regularization::{RegularisationWeight, Weight};
use crate::shock::ShockFamily;

/// Profiles outside this band are flagged as overshooting.
pub const OVERSHOOT_BAND: (f64, f64) = (-0.05, 1.05);
const FORMATION_RATIO: f64 = 5.0;
const PLATEAU_FRACTION: f64 = 0.1;
const BLOWUP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularisation {
    /// `-eps^2 u_xxxx`
    Linear,
    /// `-eps^2 (f(u) u_xx)_xx`
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretisation {
    /// `Phi_xx ~ (Phi_{i-1} - 2 Phi_i + Phi_{i+1}) / dx^2`
    Central,
    /// `Phi_xx ~ (D_{i+1/2}(u_{i+1} - u_i) - D_{i-1/2}(u_i - u_{i-1})) / dx^2`
    /// with `D_{i+1/2} = (D_i + D_{i+1}) / 2`.
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Linearly implicit Rosenbrock 2(3) with a banded Jacobian.
    Rosenbrock,
    /// Explicit Dormand-Prince 5(4); only practical on coarse grids.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub epsilon: f64,
    pub regularisation: Regularisation,
    /// Weight used by the nonlinear regularisation.
    pub weight: RegularisationWeight,
    pub discretisation: Discretisation,
    /// Step position of the Heaviside initial condition; midpoint if unset.
    pub x0: Option<f64>,
    pub left_value: f64,
    pub right_value: f64,
    pub integrator: Integrator,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            x_min: 0.0,
            x_max: 10.0,
            dx: 0.001,
            t_end: 20.0,
            snapshot_times: (0..=10).map(|k| 2.0 * k as f64).collect(),
            epsilon: 0.01,
            regularisation: Regularisation::Linear,
            weight: RegularisationWeight::constant(),
            discretisation: Discretisation::Central,
            x0: None,
            left_value: 1.0,
            right_value: 0.0,
            integrator: Integrator::Rosenbrock,
            rtol: 1e-6,
            atol: 1e-9,
        }
    }
}

impl SimulationConfig {
    /// Snapshot times `0, step, 2 step, ...` up to `t_end`.
    pub fn every(step: f64, t_end: f64) -> Vec<f64> {
        let n = (t_end / step + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * step).collect()
    }

    /// Number of grid intervals, checking that `dx` divides the domain.
    pub fn intervals(&self) -> Result<usize> {
        let len = self.x_max - self.x_min;
        if !(self.dx > 0.0 && len > 0.0) {
            return Err(Error::Config(format!(
                "need dx > 0 and x_max > x_min (dx = {}, domain [{}, {}])",
                self.dx, self.x_min, self.x_max
            )));
        }
        let n = (len / self.dx).round();
        if (n * self.dx - len).abs() > 1e-9 * len || n < 4.0 {
            return Err(Error::Config(format!(
                "dx = {} does not divide [{}, {}] into at least 4 cells",
                self.dx, self.x_min, self.x_max
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.intervals()?;
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon = {} must be positive",
                self.epsilon
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!(
                "t_end = {} must be positive",
                self.t_end
            )));
        }
        if let Some(&t) = self
            .snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.t_end).contains(&t))
        {
            return Err(Error::Config(format!(
                "snapshot time {t} outside [0, {}]",
                self.t_end
            )));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("snapshot times must be increasing".into()));
        }
        if let Some(x0) = self.x0 {
            if !(x0 > self.x_min && x0 < self.x_max) {
                return Err(Error::Config(format!("x0 = {x0} outside the domain")));
            }
        }
        crate::regularization::check_positive(&self.weight, 0.0, 1.0)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        let n = self.intervals()?;
        Ok((0..=n).map(|i| self.x_min + i as f64 * self.dx).collect())
    }

    /// Heaviside step from 1 to 0 at `x0` (value 1/2 on a node at `x0`),
    /// with the configured boundary values at the ends.
    pub fn initial_profile(&self) -> Result<Vec<f64>> {
        let x0 = self.x0.unwrap_or(0.5 * (self.x_min + self.x_max));
        let grid = self.grid()?;
        let n = grid.len() - 1;
        let mut u: Vec<f64> = grid
            .iter()
            .map(|&x| {
                if (x - x0).abs() <= 1e-9 * self.dx {
                    0.5
                } else if x < x0 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        u[0] = self.left_value;
        u[n] = self.right_value;
        Ok(u)
    }

    fn effective_weight(&self) -> RegularisationWeight {
        match self.regularisation {
            Regularisation::Linear => RegularisationWeight::constant(),
            Regularisation::Nonlinear => self.weight,
        }
    }
}

/// Pointwise coefficients of the regularised equation.
pub trait PdeCoefficients: Sync {
    fn phi(&self, u: f64) -> f64;
    fn d(&self, u: f64) -> f64;
    /// Regularisation weight `f(u)`.
    fn f(&self, u: f64) -> f64;
    fn reaction(&self, u: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct ModelTerms<'a> {
    pub model: &'a PotentialModel,
    pub reaction: &'a ReactionModel,
    pub weight: RegularisationWeight,
}

impl PdeCoefficients for ModelTerms<'_> {
    fn phi(&self, u: f64) -> f64 {
        self.model.eval(u)
    }

    fn d(&self, u: f64) -> f64 {
        self.model.d(u)
    }

    fn f(&self, u: f64) -> f64 {
        self.weight.eval(u)
    }

    fn reaction(&self, u: f64) -> f64 {
        self.reaction.eval(u)
    }
}

/// Interior time derivative for the profile `full` (all `N + 1` nodes,
/// boundary values included). `work` must hold `N + 3` values.
pub fn spatial_rhs_full<C: PdeCoefficients + ?Sized>(
    full: &[f64],
    dx: f64,
    epsilon: f64,
    scheme: Discretisation,
    coeffs: &C,
    out: &mut [f64],
    work: &mut Vec<f64>,
) {
    let n = full.len() - 1;
    let inv_dx2 = 1.0 / (dx * dx);
    let eps2 = epsilon * epsilon;
    let at = |j: isize| -> f64 {
        // mirrored ghosts enforce u_x = 0 at both ends
        if j < 0 {
            full[(-j) as usize]
        } else if j as usize > n {
            full[2 * n - j as usize]
        } else {
            full[j as usize]
        }
    };
    // q_j = [Phi_j] - eps^2 f_j (u_xx)_j for j = 0..=N
    work.clear();
    work.extend((0..=n as isize).map(|j| {
        let u = at(j);
        let lap = (at(j - 1) - 2.0 * u + at(j + 1)) * inv_dx2;
        let local = match scheme {
            Discretisation::Central => coeffs.phi(u),
            Discretisation::Conservative => 0.0,
        };
        local - eps2 * coeffs.f(u) * lap
    }));
    for i in 1..n {
        let u = full[i];
        let mut v = (work[i - 1] - 2.0 * work[i] + work[i + 1]) * inv_dx2;
        if scheme == Discretisation::Conservative {
            let (dl, dc, dr) = (coeffs.d(full[i - 1]), coeffs.d(u), coeffs.d(full[i + 1]));
            let east = 0.5 * (dc + dr) * (full[i + 1] - u);
            let west = 0.5 * (dl + dc) * (u - full[i - 1]);
            v += (east - west) * inv_dx2;
        }
        out[i - 1] = v + coeffs.reaction(u);
    }
}

/// Time derivative of the interior unknowns, boundary values supplied.
pub fn spatial_rhs<C: PdeCoefficients + ?Sized>(
    interior: &[f64],
    left_value: f64,
    right_value: f64,
    dx: f64,
    epsilon: f64,
    scheme: Discretisation,
    coeffs: &C,
) -> Result<Vec<f64>> {
    let mut full = Vec::with_capacity(interior.len() + 2);
    full.push(left_value);
    full.extend_from_slice(interior);
    full.push(right_value);
    let mut out = vec![0.0; interior.len()];
    let mut work = Vec::new();
    spatial_rhs_full(&full, dx, epsilon, scheme, coeffs, &mut out, &mut work);
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Instability {
            t: f64::NAN,
            index: i + 1,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    /// Profile on all grid nodes.
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockEstimate {
    /// Grid node of steepest descent.
    pub index: usize,
    /// `argmax |u_x|` on the grid.
    pub x_s: f64,
    /// Sub-grid position from a parabola through the slope peak.
    pub x_refined: f64,
    pub peak_slope: f64,
    pub mean_slope: f64,
    /// Low endpoint (ahead of the front).
    pub u_left: f64,
    /// High endpoint (behind the front).
    pub u_right: f64,
    /// Layer invariant `Phi - eps^2 f u_xx` at the front.
    pub phi_s: f64,
    /// Endpoints from the slope-plateau rule, for comparison.
    pub plateau: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub shock: Option<ShockEstimate>,
    /// Backward-difference speed ending at `t`.
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub grid: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub trace: Vec<TracePoint>,
    pub steps: usize,
    pub rejected_steps: usize,
    pub min_u: f64,
    pub max_u: f64,
    /// True when some snapshot left the `[-0.05, 1.05]` band.
    pub overshoot: bool,
}

impl SimulationResult {
    pub fn final_shock(&self) -> Option<ShockEstimate> {
        self.trace.last().and_then(|p| p.shock)
    }

    /// Speeds from the trace, one per consecutive pair with a located front.
    pub fn speeds(&self) -> Vec<(f64, f64)> {
        self.trace
            .iter()
            .filter_map(|p| p.speed.map(|s| (p.t, s)))
            .collect()
    }
}

/// Central-difference slopes `|u_x|` at interior nodes (zero at the ends).
fn slopes(profile: &[f64], dx: f64) -> Vec<f64> {
    let n = profile.len() - 1;
    let mut s = vec![0.0; n + 1];
    for i in 1..n {
        s[i] = ((profile[i + 1] - profile[i - 1]) / (2.0 * dx)).abs();
    }
    s
}

/// Locates the steepest point of the profile; errors unless its slope is
/// well above the mean slope.
pub fn locate_front(profile: &[f64], grid: &[f64]) -> Result<(usize, f64, f64)> {
    let dx = grid[1] - grid[0];
    let s = slopes(profile, dx);
    let n = profile.len() - 1;
    let mut index = 1;
    for i in 1..n {
        if s[i] > s[index] {
            index = i;
        }
    }
    let peak = s[index];
    let mean = s[1..n].iter().sum::<f64>() / (n - 1) as f64;
    if !(peak > FORMATION_RATIO * mean) {
        return Err(Error::NoFront { peak, mean });
    }
    Ok((index, peak, mean))
}

/// Endpoints where `|u_x|` first drops below a tenth of its peak on each
/// side of the front: `(low, high)` values of `u`.
pub fn plateau_endpoints(profile: &[f64], grid: &[f64], index: usize) -> (f64, f64) {
    let dx = grid[1] - grid[0];
    let s = slopes(profile, dx);
    let cut = PLATEAU_FRACTION * s[index];
    let n = profile.len() - 1;
    let mut l = index;
    while l > 1 && s[l] >= cut {
        l -= 1;
    }
    let mut r = index;
    while r < n - 1 && s[r] >= cut {
        r += 1;
    }
    let (a, b) = (profile[l], profile[r]);
    (a.min(b), a.max(b))
}

/// Front position and endpoint estimate for a profile.
///
/// Inside the shock layer `q = Phi(u) - eps^2 f(u) u_xx` is nearly
/// constant and equals the shock potential, so the endpoints are read off
/// as the outer-branch inverses of `q` at the front rather than from where
/// the profile flattens. The plateau endpoints are reported alongside.
pub fn extract_shock(
    profile: &[f64],
    grid: &[f64],
    model: &PotentialModel,
    weight: &RegularisationWeight,
    epsilon: f64,
) -> Result<ShockEstimate> {
    let (index, peak_slope, mean_slope) = locate_front(profile, grid)?;
    let n = profile.len() - 1;
    let dx = grid[1] - grid[0];
    let s = slopes(profile, dx);
    let q = |i: usize| {
        let u = profile[i];
        let lap = (profile[i - 1] - 2.0 * u + profile[i + 1]) / (dx * dx);
        model.eval(u) - epsilon * epsilon * weight.eval(u) * lap
    };
    let (offset, phi_s) = if index >= 2 && index + 2 <= n {
        let (sm, s0, sp) = (s[index - 1], s[index], s[index + 1]);
        let curv = sm - 2.0 * s0 + sp;
        let off = if curv < 0.0 {
            (0.5 * (sm - sp) / curv).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let (qm, q0, qp) = (q(index - 1), q(index), q(index + 1));
        // quadratic through the three q values
        let value = q0 + 0.5 * off * (qp - qm) + 0.5 * off * off * (qp - 2.0 * q0 + qm);
        (off, value)
    } else {
        (0.0, q(index))
    };
    let family = ShockFamily::new(model);
    let (lo, hi) = family.range();
    let (u_left, u_right) = family.endpoints_for_phi(phi_s.clamp(lo, hi))?;
    Ok(ShockEstimate {
        index,
        x_s: grid[index],
        x_refined: grid[index] + offset * dx,
        peak_slope,
        mean_slope,
        u_left,
        u_right,
        phi_s,
        plateau: plateau_endpoints(profile, grid, index),
    })
}

/// Backward-difference speeds `(t_i, (x_i - x_{i-1}) / (t_i - t_{i-1}))`.
pub fn estimate_speed(trace: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if trace.len() < 2 {
        return Err(Error::Config(format!(
            "speed estimate needs at least two trace points, got {}",
            trace.len()
        )));
    }
    trace
        .windows(2)
        .map(|w| {
            let dt = w[1].0 - w[0].0;
            if !(dt > 0.0) {
                return Err(Error::Config("trace times must increase".into()));
            }
            Ok((w[1].0, (w[1].1 - w[0].1) / dt))
        })
        .collect()
}

struct Recorder<'a> {
    times: &'a [f64],
    next: usize,
    left: f64,
    right: f64,
    snapshots: Vec<Snapshot>,
}

impl Recorder<'_> {
    fn full(&self, interior: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(interior.len() + 2);
        u.push(self.left);
        u.extend_from_slice(interior);
        u.push(self.right);
        u
    }

    fn record(&mut self, t0: f64, t1: f64, eval: impl Fn(f64) -> Vec<f64>) {
        while self.next < self.times.len() && self.times[self.next] <= t1 {
            let ts = self.times[self.next];
            if ts >= t0 {
                let u = self.full(&eval(ts));
                self.snapshots.push(Snapshot { t: ts, u });
            }
            self.next += 1;
        }
    }
}

fn check_finite(y: &[f64], t: f64) -> Result<()> {
    match y.iter().position(|v| !v.is_finite() || v.abs() > BLOWUP) {
        Some(i) => Err(Error::Instability { t, index: i + 1 }),
        None => Ok(()),
    }
}

/// Runs the simulation and extracts the shock trace at every snapshot.
pub fn integrate(
    config: &SimulationConfig,
    model: &PotentialModel,
    reaction: &ReactionModel,
) -> Result<SimulationResult> {
    config.validate()?;
    let grid = config.grid()?;
    let u0 = config.initial_profile()?;
    let n = grid.len() - 1;
    let weight = config.effective_weight();
    let terms = ModelTerms {
        model,
        reaction,
        weight,
    };
    let (dx, eps, scheme) = (config.dx, config.epsilon, config.discretisation);
    let (left, right) = (config.left_value, config.right_value);

    let mut full = u0.clone();
    let mut work = Vec::with_capacity(n + 3);
    let mut rhs = move |y: &[f64], dy: &mut [f64]| {
        full[1..n].copy_from_slice(y);
        spatial_rhs_full(&full, dx, eps, scheme, &terms, dy, &mut work);
    };

    let mut rec = Recorder {
        times: &config.snapshot_times,
        next: 0,
        left,
        right,
        snapshots: Vec::new(),
    };
    if rec.times.first() == Some(&0.0) {
        rec.snapshots.push(Snapshot {
            t: 0.0,
            u: u0.clone(),
        });
        rec.next = 1;
    }

    let (steps, rejected) = match config.integrator {
        Integrator::Rosenbrock => {
            let opts = StiffOptions {
                rtol: config.rtol,
                atol: config.atol,
                ..Default::default()
            };
            let out = ode23s(
                &mut rhs,
                &u0[1..n],
                0.0,
                config.t_end,
                2,
                2,
                &opts,
                |step| {
                    let y1 = step.eval(step.t1);
                    check_finite(&y1, step.t1)?;
                    rec.record(step.t0, step.t1, |t| step.eval(t));
                    Ok(())
                },
            )?;
            (out.steps, out.rejected)
        }
        Integrator::Explicit => {
            let opts = Dopri5Options {
                rtol: config.rtol,
                atol: config.atol,
                max_steps: 50_000_000,
                ..Default::default()
            };
            let mut blowup = None;
            type NoEvent = fn(f64, &[f64]) -> f64;
            let out = dopri5(
                |_, y: &[f64], dy: &mut [f64]| rhs(y, dy),
                0.0,
                &u0[1..n],
                config.t_end,
                &opts,
                None::<NoEvent>,
                |step| {
                    if blowup.is_none() {
                        if let Err(e) = check_finite(&step.eval(step.t1), step.t1) {
                            blowup = Some(e);
                        }
                        rec.record(step.t0, step.t1, |t| step.eval(t));
                    }
                },
            )?;
            if let Some(e) = blowup {
                return Err(e);
            }
            check_finite(&out.y, out.t)?;
            (out.steps, 0)
        }
    };

    let snapshots = rec.snapshots;
    let (mut min_u, mut max_u) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &snapshots {
        for &v in &s.u {
            min_u = min_u.min(v);
            max_u = max_u.max(v);
        }
    }
    let mut trace: Vec<TracePoint> = snapshots
        .iter()
        .map(|s| TracePoint {
            t: s.t,
            shock: extract_shock(&s.u, &grid, model, &weight, eps).ok(),
            speed: None,
        })
        .collect();
    for i in 1..trace.len() {
        if let (Some(a), Some(b)) = (trace[i - 1].shock, trace[i].shock) {
            let pair = [(trace[i - 1].t, a.x_s), (trace[i].t, b.x_s)];
            trace[i].speed = estimate_speed(&pair)?.first().map(|p| p.1);
        }
    }
    Ok(SimulationResult {
        grid,
        snapshots,
        trace,
        steps,
        rejected_steps: rejected,
        min_u,
        max_u,
        overshoot: min_u < OVERSHOOT_BAND.0 || max_u > OVERSHOOT_BAND.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretisationErrorReport {
    pub scheme: Discretisation,
    /// Node indices the terms are evaluated at (`2..=N-2`).
    pub first_index: usize,
    pub terms: Vec<f64>,
    pub max_abs: f64,
    pub rms: f64,
}

impl DiscretisationErrorReport {
    pub fn to_csv(&self, grid: &[f64]) -> String {
        let mut out = String::from("x,error\n");
        for (k, e) in self.terms.iter().enumerate() {
            out.push_str(&row(&[grid[self.first_index + k], *e]));
            out.push('\n');
        }
        out
    }
}

/// Leading truncation error of the `Phi_xx` discretisation on a profile:
/// `-dx^2 Phi_xxxx / 12` for the central scheme and
/// `-dx^2 / 12 (D u_xxxx + 2 D_x u_xxx + 3 D_xx u_xx + 2 D_xxx u_x)` for the
/// conservative one, with derivatives from central differences.
pub fn discretisation_error_report(
    profile: &[f64],
    dx: f64,
    scheme: Discretisation,
    model: &PotentialModel,
) -> DiscretisationErrorReport {
    let n = profile.len() - 1;
    let d = model.diffusivity();
    let mut terms = Vec::with_capacity(n.saturating_sub(3));
    for i in 2..=n.saturating_sub(2) {
        let w = [
            profile[i - 2],
            profile[i - 1],
            profile[i],
            profile[i + 1],
            profile[i + 2],
        ];
        let e = match scheme {
            Discretisation::Central => {
                let p: Vec<f64> = w.iter().map(|&u| model.eval(u)).collect();
                let p4 = (p[0] - 4.0 * p[1] + 6.0 * p[2] - 4.0 * p[3] + p[4]) / dx.powi(4);
                -dx * dx * p4 / 12.0
            }
            Discretisation::Conservative => {
                let u = w[2];
                let ux = (w[3] - w[1]) / (2.0 * dx);
                let uxx = (w[3] - 2.0 * u + w[1]) / (dx * dx);
                let uxxx = (w[4] - 2.0 * w[3] + 2.0 * w[1] - w[0]) / (2.0 * dx.powi(3));
                let uxxxx = (w[0] - 4.0 * w[1] + 6.0 * u - 4.0 * w[3] + w[4]) / dx.powi(4);
                let (d0, d1, d2, d3) = (
                    d.eval(u),
                    d.derivative(u),
                    d.second_derivative(u),
                    d.third_derivative(u),
                );
                let dx_ = d1 * ux;
                let dxx = d2 * ux * ux + d1 * uxx;
                let dxxx = d3 * ux.powi(3) + 3.0 * d2 * ux * uxx + d1 * uxxx;
                -dx * dx / 12.0
                    * (d0 * uxxxx + 2.0 * dx_ * uxxx + 3.0 * dxx * uxx + 2.0 * dxxx * ux)
            }
        };
        terms.push(e);
    }
    let max_abs = terms.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let rms = if terms.is_empty() {
        0.0
    } else {
        (terms.iter().map(|e| e * e).sum::<f64>() / terms.len() as f64).sqrt()
    };
    DiscretisationErrorReport {
        scheme,
        first_index: 2,
        terms,
        max_abs,
        rms,
    }
}

fn time_tag(t: f64) -> String {
    format!("{t:08.3}").replace('.', "p")
}

/// `x,u` rows for one snapshot.
pub fn snapshot_csv(grid: &[f64], snapshot: &Snapshot) -> String {
    let mut out = String::from("x,u\n");
    for (x, u) in grid.iter().zip(&snapshot.u) {
        out.push_str(&row(&[*x, *u]));
        out.push('\n');
    }
    out
}

/// `t,x_s,u_left,u_right,speed` rows; missing values are left empty.
pub fn trace_csv(trace: &[TracePoint]) -> String {
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let mut out = String::from("t,x_s,u_left,u_right,speed\n");
    for p in trace {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(p.t),
            opt(p.shock.map(|s| s.x_s)),
            opt(p.shock.map(|s| s.u_left)),
            opt(p.shock.map(|s| s.u_right)),
            opt(p.speed),
        ));
    }
    out
}

/// Writes one snapshot CSV per time plus `trace.csv` into `dir`.
pub fn write_result(dir: &Path, result: &SimulationResult) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    for s in &result.snapshots {
        let path = dir.join(format!("snapshot_t{}.csv", time_tag(s.t)));
        write_file(&path, &snapshot_csv(&result.grid, s))?;
        written.push(path);
    }
    let path = dir.join("trace.csv");
    write_file(&path, &trace_csv(&result.trace))?;
    written.push(path);
    Ok(written)
}
