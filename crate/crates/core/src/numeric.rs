//! Scalar numerics used across the crate: adaptive quadrature, bracketing
//! minimization, and bisection root finding.

/// Adaptive Simpson quadrature with Richardson extrapolation.
///
/// `tol` is an absolute tolerance on the whole interval; the recursion
/// splits it in half per subdivision.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let c = 0.5 * (a + b);
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = (b - a) * (fa + 4.0 * fc + fb) / 6.0;
    simpson_rec(f, a, b, fa, fb, fc, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let (fd, fe) = (f(d), f(e));
    let left = (c - a) * (fa + 4.0 * fd + fc) / 6.0;
    let right = (b - c) * (fc + 4.0 * fe + fb) / 6.0;
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1)
    }
}

/// Integrate `f` over `[a, b]`, splitting at the given interior breakpoints
/// (points where `f` has kinks or jumps). Breakpoints outside `(a, b)` are
/// ignored; each smooth piece gets an equal share of `tol`.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    debug_assert!(a <= b);
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let pieces = cuts.len() + 1;
    let piece_tol = tol / pieces as f64;
    let mut lo = a;
    let mut total = 0.0;
    for &cut in &cuts {
        total += adaptive_simpson(f, lo, cut, piece_tol);
        lo = cut;
    }
    total + adaptive_simpson(f, lo, b, piece_tol)
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
///
/// Shrinks the bracket until its width is below `rel_tol` relative to the
/// midpoint (with a small absolute floor). Returns `(x_min, f_min)`.
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        let mid = 0.5 * (a + b).abs();
        if (b - a).abs() <= rel_tol * mid.max(1e-300) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Bisection for a root of `f` in `[a, b]`; requires a sign change.
///
/// Converges until the bracket width falls below `rel_tol` relative to the
/// bracket magnitude. Panics if `f(a)` and `f(b)` have the same strict sign.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    assert!(
        fa.signum() != fb.signum(),
        "bisect: no sign change on [{a}, {b}] (f(a)={fa}, f(b)={fb})"
    );
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let scale = mid.abs().max(1e-300);
        if (b - a).abs() <= rel_tol * scale {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Ordinary least-squares line fit through `(x, y)` pairs.
///
/// Returns `(slope, intercept, rms_residual)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    assert!(points.len() >= 2, "linear_fit needs at least two points");
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}
