//! Independent reference computations for the cubic family: closed-form
//! `D` and `Phi`, bisection for every root and composite Simpson for every
//! integral. Nothing here calls into the library.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy)]
pub struct Cubic {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
}

impl Cubic {
    pub fn new(a: f64, b: f64, delta: f64) -> Self {
        Cubic { a, b, delta }
    }

    pub fn d(&self, u: f64) -> f64 {
        (u - self.a) * (u - self.b - self.delta * u * u)
    }

    pub fn phi(&self, u: f64) -> f64 {
        let Cubic { a, b, delta } = *self;
        // antiderivative of ab - (a+b)u + (1 + a delta)u^2 - delta u^3
        a * b * u - 0.5 * (a + b) * u * u + (1.0 + a * delta) * u.powi(3) / 3.0
            - 0.25 * delta * u.powi(4)
    }

    /// Zeros of `D` in (0, 1) by a fine sign scan and bisection.
    pub fn zeros(&self) -> (f64, f64) {
        let mut roots = Vec::new();
        let n = 20_000;
        for i in 0..n {
            let (x0, x1) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
            if self.d(x0) == 0.0 {
                roots.push(x0);
            } else if self.d(x0) * self.d(x1) < 0.0 {
                roots.push(bisect(|u| self.d(u), x0, x1));
            }
        }
        assert_eq!(roots.len(), 2, "expected two zeros");
        (roots[0], roots[1])
    }

    /// Outer-branch points with `Phi = phi_s`.
    pub fn endpoints(&self, phi_s: f64) -> (f64, f64) {
        let (alpha, beta) = self.zeros();
        let l = bisect(|u| self.phi(u) - phi_s, 0.0, alpha);
        let r = bisect(|u| self.phi(u) - phi_s, beta, 1.0);
        (l, r)
    }

    pub fn range(&self) -> (f64, f64) {
        let (alpha, beta) = self.zeros();
        (self.phi(beta), self.phi(alpha))
    }

    /// Equal-area shock by bisection on the area.
    pub fn equal_area(&self) -> (f64, f64) {
        let (lo, hi) = self.range();
        let area = |p: f64| {
            let (l, r) = self.endpoints(p);
            simpson(|u| self.phi(u) - p, l, r, 20_000)
        };
        let p = bisect(area, lo + 1e-14, hi - 1e-14);
        self.endpoints(p)
    }

    /// Continuous-diffusivity shock by bisection on the diffusivity jump.
    pub fn continuous_d(&self) -> (f64, f64) {
        let (lo, hi) = self.range();
        let jump = |p: f64| {
            let (l, r) = self.endpoints(p);
            self.d(l) - self.d(r)
        };
        let p = bisect(jump, lo + 1e-12 * (hi - lo), hi - 1e-12 * (hi - lo));
        self.endpoints(p)
    }

    /// `int_l^r (Phi - Phi(l)) e^{A u} du`.
    pub fn exp_area(&self, l: f64, r: f64, a: f64) -> f64 {
        let p = self.phi(l);
        simpson(|u| (self.phi(u) - p) * (a * u).exp(), l, r, 20_000)
    }
}

/// Bisection to full precision; requires a sign change.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}
