//! Bracketed one-dimensional minimizers.

/// Result of a 1-D minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const CGOLD: f64 = 0.381_966_011_250_105_1;

/// Golden-section search on `[a, b]`, stopping once the bracket is narrower
/// than `tol`. The endpoints are also evaluated so a boundary minimum is
/// returned exactly.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Minimum {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evals = 2;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evals += 1;
    }
    let (xm, fm) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    best_with_endpoints(&mut f, a.min(b), a.max(b), Minimum { x: xm, fx: fm, evaluations: evals + 2 })
}

/// Brent's method (parabolic interpolation with golden-section fallback) on
/// `[a, b]`, with absolute x-tolerance `tol`. Endpoints are compared against
/// the interior result.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Minimum {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x = lo + CGOLD * (hi - lo);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;
    let mut evals = 1;

    for _ in 0..500 {
        let xm = 0.5 * (lo + hi);
        let tol1 = tol * 0.5 + 1e-12 * x.abs();
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (hi - lo) {
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
            let etemp = e;
            if p.abs() < (0.5 * q * etemp).abs() && p > q * (lo - x) && p < q * (hi - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = tol1.copysign(xm - x);
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = CGOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = f(u);
        evals += 1;
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
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
    best_with_endpoints(&mut f, a.min(b), a.max(b), Minimum { x, fx, evaluations: evals + 2 })
}

fn best_with_endpoints<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, interior: Minimum) -> Minimum {
    let fa = f(a);
    let fb = f(b);
    let mut best = interior;
    if fa < best.fx {
        best = Minimum { x: a, fx: fa, ..best };
    }
    if fb < best.fx {
        best = Minimum { x: b, fx: fb, ..best };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_find_parabola_vertex() {
        let f = |x: f64| (x - 0.3).powi(2) + 1.0;
        for m in [golden_section(f, 0.0, 1.0, 1e-9), brent(f, 0.0, 1.0, 1e-9)] {
            assert!((m.x - 0.3).abs() < 1e-7, "{m:?}");
            assert!((m.fx - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_minimum_is_exact() {
        let f = |x: f64| x;
        assert_eq!(brent(f, 0.0, 1.0, 1e-9).x, 0.0);
        assert_eq!(golden_section(|x| -x, 0.0, 1.0, 1e-9).x, 1.0);
    }

    #[test]
    fn brent_is_cheaper_than_golden_on_smooth_functions() {
        let f = |x: f64| (x - 0.7).powi(4) + (x - 0.7).powi(2);
        let g = golden_section(f, 0.0, 1.0, 1e-8);
        let b = brent(f, 0.0, 1.0, 1e-8);
        assert!((g.x - 0.7).abs() < 1e-6 && (b.x - 0.7).abs() < 1e-6);
        assert!(b.evaluations < g.evaluations);
    }
}
