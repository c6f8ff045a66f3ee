//! Scalar minimization and root finding over fallible objectives.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Brent's method (golden section with parabolic steps) on `[lo, hi]`,
/// started from an interior point `start`.
pub fn brent_minimize<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    start: f64,
    x_tolerance: f64,
    max_evaluations: usize,
) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut x = start.clamp(a, b);
    let mut fx = f(x)?;
    let mut evaluations = 1;
    let (mut w, mut v) = (x, x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    while evaluations < max_evaluations {
        let mid = 0.5 * (a + b);
        let tol1 = x_tolerance + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if mid >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= mid { a - x } else { b - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else {
            x + tol1.copysign(d)
        };
        let fu = f(u)?;
        evaluations += 1;
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(ScalarMinimum {
        x,
        value: fx,
        evaluations,
    })
}

/// Root of a continuous function with a sign change on `[lo, hi]`
/// (bisection with secant steps, i.e. the Illinois variant of regula falsi).
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, x_tolerance: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootBracket {
            lo,
            hi,
            reason: format!("no sign change (f(lo) = {fa:e}, f(hi) = {fb:e})"),
        });
    }
    let mut side = 0i8;
    for _ in 0..400 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) {
            c
        } else {
            0.5 * (a + b)
        };
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < x_tolerance {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < x_tolerance {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_parabola() {
        let m = brent_minimize(|x| Ok((x - 0.3).powi(2) + 1.0), 0.0, 1.0, 0.5, 1e-10, 100).unwrap();
        assert!((m.x - 0.3).abs() < 1e-8);
        assert!((m.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn minimizes_a_non_smooth_function() {
        let m = brent_minimize(|x| Ok((x - 0.7).abs()), 0.0, 1.0, 0.2, 1e-10, 200).unwrap();
        assert!((m.x - 0.7).abs() < 1e-8);
    }

    #[test]
    fn propagates_errors() {
        let err = brent_minimize(|_| Err(Error::NoPhotonPairs), 0.0, 1.0, 0.5, 1e-6, 10);
        assert_eq!(err.unwrap_err(), Error::NoPhotonPairs);
    }

    #[test]
    fn finds_roots() {
        let r = find_root(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let r = find_root(|x| Ok((x - 1.0).powi(3)), 0.0, 5.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-6);
        assert!(find_root(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).is_err());
    }
}
