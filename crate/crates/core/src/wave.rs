//! Travelling waves in the ε → 0 limit.
//!
//! Away from the shock the wave lies on the critical manifold and obeys the
//! desingularised reduced flow
//!
//! ```text
//! du/dψ = -p - c u,    dp/dψ = R(u) D(u),
//! ```
//!
//! whose saddles `u0 = (0, 0)` and `u1 = (1, -c)` are joined across the
//! shock. The speed `c` is the one for which the unstable manifold of `u1`
//! reaches `u = u_r` at the same `p` as the stable manifold of `u0` reaches
//! `u = u_l`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{PotentialModel, ReactionModel};
use crate::numeric::brent;
use crate::numeric::ode::{dopri5, Dopri5Options};
use crate::numeric::quad::integrate;
use crate::output::row;
use crate::regularization::Weight;
use crate::shock::ShockPosition;

pub const SEED_OFFSET: f64 = 1e-8;
const PSI_CHUNK: f64 = 50.0;
const PSI_LIMIT: f64 = 1e4;
const P_BOUND: f64 = 10.0;

/// Reduced-flow vector field `(du/dψ, dp/dψ)`.
pub fn desingularised_rhs(
    u: f64,
    p: f64,
    c: f64,
    model: &PotentialModel,
    reaction: &ReactionModel,
) -> (f64, f64) {
    (-p - c * u, reaction.eval(u) * model.d(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Equilibrium {
    /// `(0, 0)`
    Zero,
    /// `(gamma, -c gamma)`
    Gamma,
    /// `(1, -c)`
    One,
}

impl Equilibrium {
    pub fn point(self, c: f64, reaction: &ReactionModel) -> Result<(f64, f64)> {
        let u = match (self, reaction) {
            (Equilibrium::Zero, _) => 0.0,
            (Equilibrium::One, _) => 1.0,
            (Equilibrium::Gamma, ReactionModel::Cubic { gamma }) => *gamma,
            (Equilibrium::Gamma, ReactionModel::Zero) => return Err(Error::ZeroReaction),
        };
        Ok((u, -c * u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleDirections {
    pub point: (f64, f64),
    pub jacobian: [[f64; 2]; 2],
    pub stable_eigenvalue: f64,
    pub unstable_eigenvalue: f64,
    /// Unit eigenvectors, oriented with non-negative `u` component.
    pub stable: [f64; 2],
    pub unstable: [f64; 2],
}

fn unit_eigenvector(c: f64, lambda: f64) -> [f64; 2] {
    // (J - λ) v = 0 with first row (-c - λ, -1)
    let v = [1.0, -c - lambda];
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// Linearisation of the reduced flow at an equilibrium. Errors unless the
/// Jacobian determinant is negative.
pub fn saddle_directions(
    eq: Equilibrium,
    c: f64,
    model: &PotentialModel,
    reaction: &ReactionModel,
) -> Result<SaddleDirections> {
    let point = eq.point(c, reaction)?;
    let u = point.0;
    // d/du (R D) at a zero of R
    let k =
        reaction.derivative(u) * model.d(u) + reaction.eval(u) * model.diffusivity().derivative(u);
    let jacobian = [[-c, -1.0], [k, 0.0]];
    let det = k;
    if !(det < 0.0) {
        return Err(Error::NotSaddle { u, det });
    }
    let root = (c * c - 4.0 * k).sqrt();
    let unstable_eigenvalue = 0.5 * (-c + root);
    let stable_eigenvalue = 0.5 * (-c - root);
    Ok(SaddleDirections {
        point,
        jacobian,
        stable_eigenvalue,
        unstable_eigenvalue,
        stable: unit_eigenvector(c, stable_eigenvalue),
        unstable: unit_eigenvector(c, unstable_eigenvalue),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub psi: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shot {
    pub c: f64,
    pub p_at_ur: f64,
    pub p_at_ul: f64,
    /// `p(u_r) - p(u_l)`.
    pub mismatch: f64,
    /// Unstable manifold of `u1`, run forward in ψ down to `u = u_r`.
    pub unstable: Vec<TrajectoryPoint>,
    /// Stable manifold of `u0`, run backward in ψ up to `u = u_l`.
    pub stable: Vec<TrajectoryPoint>,
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub seed_offset: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            seed_offset: SEED_OFFSET,
            rtol: 1e-10,
            atol: 1e-13,
        }
    }
}

fn trace_to(
    seed: [f64; 2],
    direction: f64,
    target: f64,
    c: f64,
    model: &PotentialModel,
    reaction: &ReactionModel,
    opts: &ShootingOptions,
) -> Result<(f64, Vec<TrajectoryPoint>)> {
    let dopts = Dopri5Options {
        rtol: opts.rtol,
        atol: opts.atol,
        ..Default::default()
    };
    let mut path = vec![TrajectoryPoint {
        psi: 0.0,
        u: seed[0],
        p: seed[1],
    }];
    let mut psi: f64 = 0.0;
    let mut y = seed.to_vec();
    let side = (seed[0] - target).signum();
    while psi.abs() < PSI_LIMIT {
        let out = dopri5(
            |_, y: &[f64], dy: &mut [f64]| {
                let (du, dp) = desingularised_rhs(y[0], y[1], c, model, reaction);
                dy[0] = du;
                dy[1] = dp;
            },
            psi,
            &y,
            psi + direction * PSI_CHUNK,
            &dopts,
            Some(|_: f64, y: &[f64]| (y[0] - target) * side),
            |step| {
                let v = step.eval(step.t1);
                path.push(TrajectoryPoint {
                    psi: step.t1,
                    u: v[0],
                    p: v[1],
                });
            },
        )?;
        psi = out.t;
        y = out.y;
        if out.event {
            let last = path.last_mut().expect("path has the seed");
            *last = TrajectoryPoint {
                psi,
                u: y[0],
                p: y[1],
            };
            return Ok((y[1], path));
        }
        if !(y[0] > -0.01 && y[0] < 1.01 && y[1].abs() < P_BOUND) {
            break;
        }
    }
    Err(Error::Escape {
        target,
        u: y[0],
        p: y[1],
        psi,
    })
}

/// Shoots both saddle manifolds toward the shock lines at speed `c`.
pub fn shoot_manifolds(
    c: f64,
    shock: &ShockPosition,
    model: &PotentialModel,
    reaction: &ReactionModel,
    opts: &ShootingOptions,
) -> Result<Shot> {
    if reaction.is_zero() {
        return Err(Error::ZeroReaction);
    }
    let one = saddle_directions(Equilibrium::One, c, model, reaction)?;
    let zero = saddle_directions(Equilibrium::Zero, c, model, reaction)?;
    let eps = opts.seed_offset;
    // leave u1 with u decreasing, leave u0 (backwards) with u increasing
    let seed_one = [
        one.point.0 - eps * one.unstable[0],
        one.point.1 - eps * one.unstable[1],
    ];
    let seed_zero = [
        zero.point.0 + eps * zero.stable[0],
        zero.point.1 + eps * zero.stable[1],
    ];
    let (p_at_ur, unstable) = trace_to(seed_one, 1.0, shock.u_right, c, model, reaction, opts)?;
    let (p_at_ul, stable) = trace_to(seed_zero, -1.0, shock.u_left, c, model, reaction, opts)?;
    Ok(Shot {
        c,
        p_at_ur,
        p_at_ul,
        mismatch: p_at_ur - p_at_ul,
        unstable,
        stable,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SpeedSearch {
    pub c_min: f64,
    pub c_max: f64,
    pub scan_step: f64,
}

impl Default for SpeedSearch {
    fn default() -> Self {
        SpeedSearch {
            c_min: 0.0,
            c_max: 0.5,
            scan_step: 0.005,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSpeedSolution {
    pub c: f64,
    pub shock: ShockPosition,
    pub shot: Shot,
    /// `|c + (Phi_z(u_r) - Phi_z(u_l)) / (u_r - u_l)|` with `Phi_z = -p - c u`.
    pub weak_residual: f64,
    /// `(c, mismatch)` on the bracketing scan; failed shots are omitted.
    pub scan: Vec<(f64, f64)>,
}

/// Weak-solution speed residual for a shot.
pub fn weak_solution_residual(shot: &Shot, shock: &ShockPosition) -> f64 {
    let c = shot.c;
    let flux_r = -shot.p_at_ur - c * shock.u_right;
    let flux_l = -shot.p_at_ul - c * shock.u_left;
    (c + (flux_r - flux_l) / shock.length()).abs()
}

/// Finds the speed at which the two manifolds meet the shock at equal `p`.
pub fn solve_wave_speed(
    shock: &ShockPosition,
    model: &PotentialModel,
    reaction: &ReactionModel,
    search: &SpeedSearch,
    opts: &ShootingOptions,
) -> Result<WaveSpeedSolution> {
    if reaction.is_zero() {
        return Err(Error::ZeroReaction);
    }
    let n = ((search.c_max - search.c_min) / search.scan_step)
        .ceil()
        .max(1.0) as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|k| (search.c_min + k as f64 * search.scan_step).min(search.c_max))
        .collect();
    let scan: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&c| {
            (
                c,
                shoot_manifolds(c, shock, model, reaction, opts).map(|s| s.mismatch),
            )
        })
        .collect::<Vec<_>>()
        .into_iter()
        .filter_map(|(c, r)| r.ok().map(|m| (c, m)))
        .collect();
    let bracket = scan
        .windows(2)
        .find(|w| w[0].1 == 0.0 || (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .map(|w| (w[0].0, w[1].0))
        .ok_or(Error::NoSpeedBracket {
            c_min: search.c_min,
            c_max: search.c_max,
        })?;
    let mismatch = |c: f64| {
        shoot_manifolds(c, shock, model, reaction, opts)
            .map(|s| s.mismatch)
            .unwrap_or(f64::NAN)
    };
    let c = brent(mismatch, bracket.0, bracket.1, 1e-14)?;
    let shot = shoot_manifolds(c, shock, model, reaction, opts)?;
    Ok(WaveSpeedSolution {
        c,
        shock: *shock,
        weak_residual: weak_solution_residual(&shot, shock),
        shot,
        scan,
    })
}

/// `psi,u,p` rows for a manifold trajectory.
pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from("psi,u,p\n");
    for pt in points {
        out.push_str(&row(&[pt.psi, pt.u, pt.p]));
        out.push('\n');
    }
    out
}

/// Layer (fast) problem `(du/dξ, dw/dξ) = (w, (v + Phi(u)) / f(u))`.
pub fn layer_rhs<W: Weight + ?Sized>(
    u: f64,
    w: f64,
    v: f64,
    f: &W,
    model: &PotentialModel,
) -> (f64, f64) {
    (w, (v + model.eval(u)) / f.eval(u))
}

/// Squared eigenvalue `D(u) / f(u)` of the layer problem at the critical
/// manifold point over `u`; the pair is `±sqrt` of this, imaginary when
/// negative.
pub fn layer_eigenvalue_squared<W: Weight + ?Sized>(u: f64, f: &W, model: &PotentialModel) -> f64 {
    model.d(u) / f.eval(u)
}

/// `H = -w²/2 + v F(u) + G(u)` with `F = int_0^u 1/f` and `G = int_0^u Phi/f`.
pub fn layer_hamiltonian<W: Weight + ?Sized>(
    u: f64,
    w: f64,
    v: f64,
    f: &W,
    model: &PotentialModel,
) -> Result<f64> {
    let big_f = integrate(|s| 1.0 / f.eval(s), 0.0, u, 1e-15)?;
    let big_g = integrate(|s| model.eval(s) / f.eval(s), 0.0, u, 1e-15)?;
    Ok(-0.5 * w * w + v * big_f + big_g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerTrajectory {
    /// `(ξ, u, w)` samples.
    pub points: Vec<(f64, f64, f64)>,
    pub hamiltonian: Vec<f64>,
    pub max_drift: f64,
}

/// Integrates the layer problem with `v = -Phi_S` from the saddle at
/// `(u_l, 0)` along its unstable direction until `u` has covered
/// `fraction` of the way to `u_r`, tracking `H` at every accepted step.
pub fn layer_trajectory<W: Weight + ?Sized>(
    shock: &ShockPosition,
    f: &W,
    model: &PotentialModel,
    fraction: f64,
) -> Result<LayerTrajectory> {
    let v = -shock.phi_s;
    let lam = layer_eigenvalue_squared(shock.u_left, f, model);
    if !(lam > 0.0) {
        return Err(Error::NotSaddle {
            u: shock.u_left,
            det: -lam,
        });
    }
    let lam = lam.sqrt();
    let n = lam.hypot(1.0);
    let y0 = [shock.u_left + SEED_OFFSET / n, SEED_OFFSET * lam / n];
    let target = shock.u_left + fraction * shock.length();
    let mut points = vec![(0.0, y0[0], y0[1])];
    let out = dopri5(
        |_, y: &[f64], dy: &mut [f64]| {
            let (du, dw) = layer_rhs(y[0], y[1], v, f, model);
            dy[0] = du;
            dy[1] = dw;
        },
        0.0,
        &y0,
        1e4,
        &Dopri5Options::default(),
        Some(|_: f64, y: &[f64]| y[0] - target),
        |step| {
            let y = step.eval(step.t1);
            points.push((step.t1, y[0], y[1]));
        },
    )?;
    if !out.event {
        return Err(Error::Escape {
            target,
            u: out.y[0],
            p: out.y[1],
            psi: out.t,
        });
    }
    let hamiltonian = points
        .iter()
        .map(|&(_, u, w)| layer_hamiltonian(u, w, v, f, model))
        .collect::<Result<Vec<_>>>()?;
    let h0 = hamiltonian[0];
    let max_drift = hamiltonian
        .iter()
        .map(|h| (h - h0).abs())
        .fold(0.0, f64::max);
    Ok(LayerTrajectory {
        points,
        hamiltonian,
        max_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularization::{
        shock_for_weight, solve_weight_parameter, RegularisationWeight, WeightFamily,
    };
    use crate::shock::{continuous_diffusivity_shock, equal_area_shock};

    fn setup() -> (PotentialModel, ReactionModel) {
        (
            PotentialModel::cubic(0.2, 0.4, 0.5).unwrap(),
            ReactionModel::cubic(0.5).unwrap(),
        )
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let (m, r) = setup();
        for c in [0.0, 0.0232, 0.3] {
            for eq in [Equilibrium::Zero, Equilibrium::Gamma, Equilibrium::One] {
                let (u, p) = eq.point(c, &r).unwrap();
                let (du, dp) = desingularised_rhs(u, p, c, &m, &r);
                assert!(du.abs() <= 1e-14 && dp.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn saddles_at_both_ends() {
        let (m, r) = setup();
        let c = 0.0232;
        for eq in [Equilibrium::Zero, Equilibrium::One] {
            let s = saddle_directions(eq, c, &m, &r).unwrap();
            let j = s.jacobian;
            // characteristic polynomial oracle: λ² - tr λ + det
            let (tr, det) = (j[0][0] + j[1][1], j[0][0] * j[1][1] - j[0][1] * j[1][0]);
            assert!(det < 0.0);
            assert!((s.stable_eigenvalue * s.unstable_eigenvalue - det).abs() < 1e-14);
            assert!((s.stable_eigenvalue + s.unstable_eigenvalue - tr).abs() < 1e-14);
            for (lam, v) in [
                (s.stable_eigenvalue, s.stable),
                (s.unstable_eigenvalue, s.unstable),
            ] {
                let res0 = j[0][0] * v[0] + j[0][1] * v[1] - lam * v[0];
                let res1 = j[1][0] * v[0] + j[1][1] * v[1] - lam * v[1];
                assert!(res0.hypot(res1) <= 1e-10);
            }
        }
        // D < 0 at gamma = 0.5 flips the sign of the desingularised flow there
        let g = saddle_directions(Equilibrium::Gamma, c, &m, &r).unwrap();
        assert!((g.jacobian[1][0] - 0.25 * m.d(0.5)).abs() < 1e-15);
        let quad = PotentialModel::cubic(0.2, 0.4, 0.0).unwrap();
        let low = ReactionModel::cubic(0.1).unwrap();
        assert!(matches!(
            saddle_directions(Equilibrium::Gamma, c, &quad, &low),
            Err(Error::NotSaddle { .. })
        ));
    }

    #[test]
    fn mismatch_changes_sign_across_speed() {
        let (m, r) = setup();
        let cd = continuous_diffusivity_shock(&m).unwrap();
        let o = ShootingOptions::default();
        let slow = shoot_manifolds(0.013, &cd, &m, &r, &o).unwrap();
        let fast = shoot_manifolds(0.033, &cd, &m, &r, &o).unwrap();
        assert!(slow.mismatch * fast.mismatch < 0.0);
        let near = shoot_manifolds(0.0232, &cd, &m, &r, &o).unwrap();
        assert!(near.mismatch.abs() < 0.1 * slow.mismatch.abs().min(fast.mismatch.abs()));
        // trajectories end on the shock lines
        assert!((near.unstable.last().unwrap().u - cd.u_right).abs() < 1e-12);
        assert!((near.stable.last().unwrap().u - cd.u_left).abs() < 1e-12);
    }

    #[test]
    fn seed_offset_insensitivity() {
        let (m, r) = setup();
        let cd = continuous_diffusivity_shock(&m).unwrap();
        let a = shoot_manifolds(0.0232, &cd, &m, &r, &ShootingOptions::default()).unwrap();
        let half = ShootingOptions {
            seed_offset: 0.5 * SEED_OFFSET,
            ..Default::default()
        };
        let b = shoot_manifolds(0.0232, &cd, &m, &r, &half).unwrap();
        assert!((a.p_at_ur - b.p_at_ur).abs() <= 1e-6);
        assert!((a.p_at_ul - b.p_at_ul).abs() <= 1e-6);
    }

    #[test]
    fn wave_speeds() {
        let (m, r) = setup();
        let o = ShootingOptions::default();
        let s = SpeedSearch::default();
        let cd = continuous_diffusivity_shock(&m).unwrap();
        let sol = solve_wave_speed(&cd, &m, &r, &s, &o).unwrap();
        assert!((sol.c - 0.0232).abs() < 5e-4, "{}", sol.c);
        assert!(sol.shot.mismatch.abs() <= 1e-8);
        assert!(sol.weak_residual <= 1e-8);
        let ea = equal_area_shock(&m).unwrap();
        let sol = solve_wave_speed(&ea, &m, &r, &s, &o).unwrap();
        assert!((sol.c - 0.026).abs() < 1e-3, "{}", sol.c);
        assert!(matches!(
            solve_wave_speed(&ea, &m, &ReactionModel::Zero, &s, &o),
            Err(Error::ZeroReaction)
        ));
    }

    #[test]
    fn layer_problem() {
        let (m, _) = setup();
        let cd = continuous_diffusivity_shock(&m).unwrap();
        let sol = solve_weight_parameter(&m, &cd, WeightFamily::Exponential).unwrap();
        let f = sol.weight;
        let shock = shock_for_weight(&m, &f).unwrap();
        let v = -shock.phi_s;
        // critical manifold points are equilibria
        for u in [0.05, 0.3, 0.8] {
            let (du, dw) = layer_rhs(u, 0.0, -m.eval(u), &f, &m);
            assert_eq!((du, dw), (0.0, 0.0));
        }
        // imaginary pair inside (alpha, beta), real pair outside
        assert!(layer_eigenvalue_squared(0.3, &f, &m) < 0.0);
        assert!(layer_eigenvalue_squared(0.1, &f, &m) > 0.0);
        let one = RegularisationWeight::constant();
        assert!((layer_eigenvalue_squared(0.1, &one, &m) - m.d(0.1)).abs() < 1e-16);

        let hl = layer_hamiltonian(shock.u_left, 0.0, v, &f, &m).unwrap();
        let hr = layer_hamiltonian(shock.u_right, 0.0, v, &f, &m).unwrap();
        assert!((hl - hr).abs() <= 1e-8);
        let h = layer_hamiltonian(0.4, 0.3, v, &f, &m).unwrap();
        let h0 = layer_hamiltonian(0.4, 0.0, v, &f, &m).unwrap();
        assert_eq!(h - h0, -0.5 * 0.3 * 0.3);

        let traj = layer_trajectory(&shock, &f, &m, 0.99).unwrap();
        assert!(traj.max_drift <= 1e-8, "{}", traj.max_drift);
        assert!(traj.points.len() > 10);
    }

    #[test]
    fn csv_layout() {
        let pts = [TrajectoryPoint {
            psi: 0.0,
            u: 1.0,
            p: -0.5,
        }];
        let csv = trajectory_csv(&pts);
        assert_eq!(csv.lines().next(), Some("psi,u,p"));
        assert_eq!(csv.lines().count(), 2);
    }
}
