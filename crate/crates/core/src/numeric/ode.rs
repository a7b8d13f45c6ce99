//! Dormand-Prince 5(4) with continuous extension and event location.

use crate::error::{Error, Result};
use crate::numeric::roots::brent;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed |h|; infinite by default.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options {
            rtol: 1e-10,
            atol: 1e-13,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

/// Continuous extension over one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    r: [Vec<f64>; 5],
}

impl DenseStep {
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        (0..self.r[0].len())
            .map(|i| {
                self.r[0][i]
                    + th * (self.r[1][i]
                        + th1 * (self.r[2][i] + th * (self.r[3][i] + th1 * self.r[4][i])))
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub t: f64,
    pub y: Vec<f64>,
    /// True when integration stopped on an event rather than at `t_end`.
    pub event: bool,
    pub steps: usize,
}

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..y.len() {
        let mut s = 0.0;
        for &(c, k) in terms {
            s += c * k[i];
        }
        out[i] = y[i] + h * s;
    }
}

fn norm(v: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = v.len() as f64;
    let s: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(&e, (&a, &b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `event(t, y)` is watched for a sign change between accepted steps; the
/// crossing is located on the continuous extension with Brent's method and
/// integration stops there. `observer` sees every accepted step.
pub fn dopri5<F, G, O>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Dopri5Options,
    mut event: Option<G>,
    mut observer: O,
) -> Result<Outcome>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    G: FnMut(f64, &[f64]) -> f64,
    O: FnMut(&DenseStep),
{
    let n = y0.len();
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];

    rhs(t, &y, &mut k[0]);
    let mut g_prev = event.as_mut().map(|g| g(t, &y));

    // Hairer's starting step heuristic
    let mut h = {
        let d0 = norm(&y, &y, &y, opts.rtol, opts.atol);
        let d1 = norm(&k[0], &y, &y, opts.rtol, opts.atol);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min((t_end - t0).abs()).min(opts.h_max);
        axpy(&mut ytmp, &y, dir * h0, &[(1.0, &k[0])]);
        rhs(t + dir * h0, &ytmp, &mut k[1]);
        let diff: Vec<f64> = k[1].iter().zip(&k[0]).map(|(a, b)| (a - b) / h0).collect();
        let d2 = norm(&diff, &y, &y, opts.rtol, opts.atol);
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        dir * (100.0 * h0).min(h1).min(opts.h_max)
    };

    let mut steps = 0;
    let mut reject_prev = false;
    while (t_end - t) * dir > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow { t });
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }

        axpy(&mut ytmp, &y, h, &[(A21, &k[0])]);
        rhs(t + C2 * h, &ytmp, &mut k[1]);
        axpy(&mut ytmp, &y, h, &[(A31, &k[0]), (A32, &k[1])]);
        rhs(t + C3 * h, &ytmp, &mut k[2]);
        axpy(
            &mut ytmp,
            &y,
            h,
            &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])],
        );
        rhs(t + C4 * h, &ytmp, &mut k[3]);
        axpy(
            &mut ytmp,
            &y,
            h,
            &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])],
        );
        rhs(t + C5 * h, &ytmp, &mut k[4]);
        axpy(
            &mut ytmp,
            &y,
            h,
            &[
                (A61, &k[0]),
                (A62, &k[1]),
                (A63, &k[2]),
                (A64, &k[3]),
                (A65, &k[4]),
            ],
        );
        rhs(t + h, &ytmp, &mut k[5]);
        axpy(
            &mut ynew,
            &y,
            h,
            &[
                (A71, &k[0]),
                (A73, &k[2]),
                (A74, &k[3]),
                (A75, &k[4]),
                (A76, &k[5]),
            ],
        );
        rhs(t + h, &ynew, &mut k[6]);
        for i in 0..n {
            err[i] = h
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
        }
        let e = norm(&err, &y, &ynew, opts.rtol, opts.atol);
        steps += 1;
        if !e.is_finite() {
            h *= 0.2;
            reject_prev = true;
            continue;
        }
        let fac = if e == 0.0 {
            10.0
        } else {
            (0.9 * e.powf(-0.2)).clamp(0.2, 10.0)
        };
        if e > 1.0 {
            h *= fac.min(1.0);
            reject_prev = true;
            continue;
        }

        let dense = {
            let mut r: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; n]);
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * k[6][i] - bspl;
                r[4][i] = h
                    * (D1 * k[0][i]
                        + D3 * k[2][i]
                        + D4 * k[3][i]
                        + D5 * k[4][i]
                        + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            DenseStep {
                t0: t,
                t1: t + h,
                r,
            }
        };

        if let (Some(g), Some(gp)) = (event.as_mut(), g_prev) {
            let g_new = g(t + h, &ynew);
            if gp != 0.0 && (g_new == 0.0 || g_new.signum() != gp.signum()) {
                let t_hit = brent(
                    |s| g(s, &dense.eval(s)),
                    dense.t0,
                    dense.t1,
                    1e-15 * dense.t1.abs().max(1.0),
                )?;
                let y_hit = dense.eval(t_hit);
                observer(&dense);
                return Ok(Outcome {
                    t: t_hit,
                    y: y_hit,
                    event: true,
                    steps,
                });
            }
            g_prev = Some(g_new);
        }
        observer(&dense);

        t += h;
        y.copy_from_slice(&ynew);
        k.swap(0, 6);
        let fac = if reject_prev { fac.min(1.0) } else { fac };
        reject_prev = false;
        h = (h * fac).abs().min(opts.h_max) * dir;
    }
    Ok(Outcome {
        t,
        y,
        event: false,
        steps,
    })
}
