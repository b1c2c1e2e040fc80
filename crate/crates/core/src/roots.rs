//! Scalar root finders shared by the equilibrium solver, event location and
//! the return-map fixed-point search.

/// Outcome of a bracketed search: the final bracket and the best iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracketed {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
    pub f_root: f64,
    pub evaluations: usize,
}

/// Newton's method safeguarded by a sign-change bracket `[lo, hi]`.
///
/// A Newton step that leaves the bracket, or fails to halve it, is replaced by
/// bisection. Stops when `|f| <= ftol` or the bracket is narrower than `xtol`.
/// Returns `None` if `f(lo)` and `f(hi)` have the same strict sign.
pub fn newton_bisect<F>(mut f: F, lo: f64, hi: f64, ftol: f64, xtol: f64) -> Option<Bracketed>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (fa, _) = f(a);
    let (fb, _) = f(b);
    let mut evaluations = 2;
    if fa == 0.0 {
        return Some(Bracketed { lo: a, hi: a, root: a, f_root: 0.0, evaluations });
    }
    if fb == 0.0 {
        return Some(Bracketed { lo: b, hi: b, root: b, f_root: 0.0, evaluations });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let rising = fb > 0.0;
    let mut x = 0.5 * (a + b);
    let mut width_before = b - a;
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        evaluations += 1;
        if fx.abs() <= ftol {
            return Some(Bracketed { lo: a, hi: b, root: x, f_root: fx, evaluations });
        }
        if (fx > 0.0) == rising {
            b = x;
        } else {
            a = x;
        }
        if b - a <= xtol {
            return Some(Bracketed { lo: a, hi: b, root: x, f_root: fx, evaluations });
        }
        let newton = x - fx / dfx;
        let shrinking = b - a <= 0.5 * width_before;
        x = if dfx != 0.0 && newton > a && newton < b && shrinking {
            newton
        } else {
            0.5 * (a + b)
        };
        width_before = b - a;
    }
    let (fx, _) = f(x);
    Some(Bracketed { lo: a, hi: b, root: x, f_root: fx, evaluations: evaluations + 1 })
}

/// Brent's method on a sign-change bracket.
///
/// Stops when `|f| <= ftol` or the bracket is narrower than `xtol`. Returns
/// `None` when `f(a)` and `f(b)` share a strict sign.
pub fn brent<F>(mut f: F, a: f64, b: f64, ftol: f64, xtol: f64, max_iter: usize) -> Option<Bracketed>
where
    F: FnMut(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    brent_with_values(&mut f, a, fa, b, fb, ftol, xtol, max_iter).map(|mut r| {
        r.evaluations += 2;
        r
    })
}

/// [`brent`] with the endpoint values already known.
#[allow(clippy::too_many_arguments)]
pub fn brent_with_values<F>(
    f: &mut F,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Option<Bracketed>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Some(Bracketed { lo: a, hi: a, root: a, f_root: 0.0, evaluations: 0 });
    }
    if fb == 0.0 {
        return Some(Bracketed { lo: b, hi: b, root: b, f_root: 0.0, evaluations: 0 });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut evaluations = 0;
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if fb.abs() <= ftol || m.abs() <= tol {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Some(Bracketed { lo, hi, root: b, f_root: fb, evaluations });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        evaluations += 1;
    }
    let (lo, hi) = if b < c { (b, c) } else { (c, b) };
    Some(Bracketed { lo, hi, root: b, f_root: fb, evaluations })
}

/// Plain bisection on a monotone sign change, to a bracket width of `xtol`.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some((a, a));
    }
    if fb == 0.0 {
        return Some((b, b));
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let a_negative = fa < 0.0;
    while (b - a).abs() > xtol {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some((mid, mid));
        }
        if (fm < 0.0) == a_negative {
            a = mid;
        } else {
            b = mid;
        }
    }
    Some((a, b))
}
