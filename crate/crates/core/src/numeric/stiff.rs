//! L-stable Rosenbrock 2(3) pair (Shampine & Reichelt's `ode23s` scheme)
//! for autonomous systems with a banded Jacobian.
//!
//! The Jacobian is formed by finite differences with column colouring:
//! columns `kl + ku + 1` apart never share a row, so one extra right-hand
//! side evaluation per colour fills the whole band.

use crate::error::{Error, Result};
use crate::numeric::banded::BandedMatrix;

const D: f64 = 0.292_893_218_813_452_5; // 1 / (2 + sqrt 2)
const E32: f64 = 7.414_213_562_373_095; // 6 + sqrt 2

#[derive(Debug, Clone, Copy)]
pub struct StiffOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StiffOptions {
    fn default() -> Self {
        StiffOptions {
            rtol: 1e-6,
            atol: 1e-9,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// Second-order continuous extension of one accepted step.
#[derive(Debug)]
pub struct RosenbrockDense<'a> {
    pub t0: f64,
    pub t1: f64,
    y0: &'a [f64],
    k1: &'a [f64],
    k2: &'a [f64],
}

impl RosenbrockDense<'_> {
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let c1 = s * (1.0 - s) / (1.0 - 2.0 * D);
        let c2 = s * (s - 2.0 * D) / (1.0 - 2.0 * D);
        for i in 0..out.len() {
            out[i] = self.y0[i] + h * (c1 * self.k1[i] + c2 * self.k2[i]);
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y0.len()];
        self.eval_into(t, &mut out);
        out
    }
}

#[derive(Debug, Clone)]
pub struct StiffOutcome {
    pub y: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

fn fd_jacobian<F>(
    rhs: &mut F,
    y: &[f64],
    f0: &[f64],
    jac: &mut BandedMatrix,
    work_y: &mut [f64],
    work_f: &mut [f64],
) -> usize
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = y.len();
    let (kl, ku) = (jac.lower(), jac.upper());
    let colours = kl + ku + 1;
    let sqrt_eps = f64::EPSILON.sqrt();
    jac.clear();
    let mut evals = 0;
    for c in 0..colours.min(n) {
        work_y.copy_from_slice(y);
        let mut j = c;
        while j < n {
            work_y[j] += sqrt_eps * y[j].abs().max(1.0);
            j += colours;
        }
        rhs(work_y, work_f);
        evals += 1;
        let mut j = c;
        while j < n {
            let delta = work_y[j] - y[j];
            for i in j.saturating_sub(ku)..=(j + kl).min(n - 1) {
                jac.set(i, j, (work_f[i] - f0[i]) / delta);
            }
            j += colours;
        }
    }
    evals
}

fn err_norm(err: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    err.iter()
        .zip(y0.iter().zip(y1))
        .map(|(&e, (&a, &b))| e.abs() / (atol + rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

/// Integrates the autonomous system `dy/dt = rhs(y)` from `t0` to `t_end`.
///
/// `observer` receives each accepted step's continuous extension and may
/// abort the run by returning an error.
#[allow(clippy::too_many_arguments)]
pub fn ode23s<F, O>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t_end: f64,
    kl: usize,
    ku: usize,
    opts: &StiffOptions,
    mut observer: O,
) -> Result<StiffOutcome>
where
    F: FnMut(&[f64], &mut [f64]),
    O: FnMut(&RosenbrockDense) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    let mut f2 = vec![0.0; n];
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut work_f = vec![0.0; n];
    let mut jac = BandedMatrix::zeros(n, kl, ku);

    rhs(&y, &mut f0);
    let mut evals = 1;

    let span = t_end - t0;
    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let threshold = opts.atol / opts.rtol;
            let rh = f0
                .iter()
                .zip(&y)
                .map(|(f, y)| f.abs() / y.abs().max(threshold))
                .fold(0.0, f64::max)
                / (0.8 * opts.rtol.powf(1.0 / 3.0));
            if rh > 0.0 {
                (1.0 / rh).min(span.abs())
            } else {
                span.abs()
            }
        }
    }
    .min(opts.h_max);

    let mut t = t0;
    let mut steps = 0;
    let mut rejected = 0;
    let mut jac_current = false;
    while t < t_end {
        if steps + rejected >= opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if t + h > t_end || t + 1.1 * h >= t_end {
            h = t_end - t;
        }
        if h < h_min {
            return Err(Error::StepUnderflow { t });
        }
        if !jac_current {
            evals += fd_jacobian(&mut rhs, &y, &f0, &mut jac, &mut ytmp, &mut work_f);
            jac_current = true;
        }
        let mut w = BandedMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = -h * D * jac.get(i, j) + if i == j { 1.0 } else { 0.0 };
                w.set(i, j, v);
            }
        }
        let lu = match w.factor() {
            Ok(lu) => lu,
            Err(_) => {
                h *= 0.5;
                rejected += 1;
                continue;
            }
        };

        k1.copy_from_slice(&f0);
        lu.solve(&mut k1);
        for i in 0..n {
            ytmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(&ytmp, &mut f1);
        for i in 0..n {
            k2[i] = f1[i] - k1[i];
        }
        lu.solve(&mut k2);
        for i in 0..n {
            k2[i] += k1[i];
            ynew[i] = y[i] + h * k2[i];
        }
        rhs(&ynew, &mut f2);
        for i in 0..n {
            k3[i] = f2[i] - E32 * (k2[i] - f1[i]) - 2.0 * (k1[i] - f0[i]);
        }
        lu.solve(&mut k3);
        evals += 2;

        for i in 0..n {
            k3[i] = h / 6.0 * (k1[i] - 2.0 * k2[i] + k3[i]);
        }
        let err = err_norm(&k3, &y, &ynew, opts.rtol, opts.atol);
        if !err.is_finite() || err > 1.0 {
            rejected += 1;
            let shrink = if err.is_finite() {
                (0.8 * err.powf(-1.0 / 3.0)).max(0.2)
            } else {
                0.2
            };
            h *= shrink;
            continue;
        }

        observer(&RosenbrockDense {
            t0: t,
            t1: t + h,
            y0: &y,
            k1: &k1,
            k2: &k2,
        })?;
        steps += 1;
        t += h;
        std::mem::swap(&mut y, &mut ynew);
        std::mem::swap(&mut f0, &mut f2);
        jac_current = false;
        let grow = if err == 0.0 {
            5.0
        } else {
            (0.8 * err.powf(-1.0 / 3.0)).min(5.0)
        };
        h = (h * grow).min(opts.h_max);
    }
    Ok(StiffOutcome {
        y,
        steps,
        rejected,
        rhs_evals: evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stiff_linear_decay_tracks_slow_mode() {
        // y1' = -1e6 (y1 - cos y2) style stiff pair, here linear:
        // y1' = -1000 y1 + y2, y2' = -y2  with exact y2 = e^{-t}
        let out = ode23s(
            |y, dy| {
                dy[0] = -1000.0 * y[0] + y[1];
                dy[1] = -y[1];
            },
            &[0.0, 1.0],
            0.0,
            2.0,
            1,
            1,
            &StiffOptions::default(),
            |_| Ok(()),
        )
        .unwrap();
        let y2 = (-2f64).exp();
        let y1 = (y2 - (-2000f64).exp()) / 999.0;
        assert!((out.y[1] - y2).abs() < 1e-5);
        assert!((out.y[0] - y1).abs() < 1e-7);
        assert!(out.steps < 500, "{} steps", out.steps);
    }

    #[test]
    fn heat_equation_mode_decays_at_discrete_rate() {
        // u_t = u_xx on 20 interior nodes, Dirichlet zero ends
        let n = 20;
        let dx = 1.0 / (n as f64 + 1.0);
        let k = std::f64::consts::PI;
        let u0: Vec<f64> = (1..=n).map(|i| (k * i as f64 * dx).sin()).collect();
        let rate = 4.0 / (dx * dx) * (0.5 * k * dx).sin().powi(2);
        let mut samples = Vec::new();
        let out = ode23s(
            |u, du| {
                for i in 0..n {
                    let l = if i > 0 { u[i - 1] } else { 0.0 };
                    let r = if i + 1 < n { u[i + 1] } else { 0.0 };
                    du[i] = (l - 2.0 * u[i] + r) / (dx * dx);
                }
            },
            &u0,
            0.0,
            0.1,
            1,
            1,
            &StiffOptions {
                rtol: 1e-8,
                atol: 1e-12,
                ..Default::default()
            },
            |d| {
                let tm = 0.5 * (d.t0 + d.t1);
                samples.push((tm, d.eval(tm)[n / 2]));
                Ok(())
            },
        )
        .unwrap();
        let expect = (-rate * 0.1).exp();
        for (i, &u) in out.y.iter().enumerate() {
            assert!((u - expect * u0[i]).abs() < 1e-6);
        }
        for (t, v) in samples {
            let e = (-rate * t).exp() * u0[n / 2];
            assert!((v - e).abs() < 1e-4, "dense output at {t}: {v} vs {e}");
        }
    }
}
