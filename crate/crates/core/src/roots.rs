//! Bracketed scalar root finding.
//!
//! [`brent`] is the classic bisection / secant / inverse-quadratic hybrid.
//! [`scan_sign_changes`] locates brackets on a linear or logarithmic sample
//! of an interval, skipping points where the function is undefined.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Stopping rule for [`brent`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Stop once the bracket is narrower than `rel·|x| + abs`.
    pub rel: f64,
    pub abs: f64,
    /// Stop as soon as `|f(x)| <= residual`.
    pub residual: f64,
    pub max_iterations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-12,
            abs: 0.0,
            residual: 0.0,
            max_iterations: 200,
        }
    }
}

/// Root of `f` in `[a, b]`; `f(a)` and `f(b)` must differ in sign.
pub fn brent<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            fx: fa,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            fx: fb,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BracketingFailure { lo: a, hi: b });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iteration in 1..=tol.max_iterations {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let width = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.rel * b.abs() + tol.abs);
        let half = 0.5 * (c - b);
        if half.abs() <= width || fb == 0.0 || fb.abs() <= tol.residual {
            return Ok(Root {
                x: b,
                fx: fb,
                iterations: iteration,
            });
        }
        if e.abs() >= width && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * half * q - (width * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > width {
            d
        } else {
            width.copysign(half)
        };
        fb = f(b)?;
    }
    Err(Error::Convergence {
        iterations: tol.max_iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Logarithmic,
}

/// A sub-interval `[lo, hi]` over which the sampled function changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Samples `f` at `panels + 1` points and returns every adjacent pair with a
/// sign change. Points where `f` is not finite or errors are skipped, so a
/// bracket never straddles an undefined stretch.
pub fn scan_sign_changes<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    panels: usize,
    spacing: Spacing,
) -> Vec<Bracket>
where
    F: FnMut(f64) -> Option<f64>,
{
    let panels = panels.max(1);
    let point = |i: usize| -> f64 {
        let t = i as f64 / panels as f64;
        match spacing {
            Spacing::Linear => lo + (hi - lo) * t,
            Spacing::Logarithmic => lo * (hi / lo).powf(t),
        }
    };
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=panels {
        let x = point(i);
        let fx = f(x).filter(|v| v.is_finite());
        match (prev, fx) {
            (Some((px, pf)), Some(v)) => {
                if pf == 0.0 || pf.signum() != v.signum() {
                    out.push(Bracket {
                        lo: px,
                        hi: x,
                        f_lo: pf,
                        f_hi: v,
                    });
                }
                prev = Some((x, v));
            }
            (None, Some(v)) => prev = Some((x, v)),
            (_, None) => prev = None,
        }
    }
    out
}
