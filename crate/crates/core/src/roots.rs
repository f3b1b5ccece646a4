//! Deterministic bisection.

/// Default tolerance on the `p` axis for every interval endpoint.
pub const BISECT_TOL: f64 = 1e-10;

/// Number of halvings that shrink `[lo, hi]` to width `<= tol`.
fn iterations(lo: f64, hi: f64, tol: f64) -> u32 {
    let ratio = (hi - lo) / tol;
    if ratio <= 1.0 {
        0
    } else {
        ratio.log2().ceil() as u32
    }
}

/// Locates the switch point of a predicate that is `false` on the left of
/// `[lo, hi]` and `true` on the right.
///
/// Returns the final bracket `(l, h)` with `h - l <= tol`: every point `<= l`
/// that was probed was `false`, every point `>= h` was `true`. The endpoints
/// themselves are not evaluated; callers decide what the ends mean.
pub fn bisect_boundary<P: FnMut(f64) -> bool>(
    mut pred: P,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, f64) {
    let (mut l, mut h) = (lo, hi);
    for _ in 0..iterations(lo, hi, tol) {
        let mid = 0.5 * (l + h);
        if pred(mid) {
            h = mid;
        } else {
            l = mid;
        }
    }
    (l, h)
}

/// Solves `f(x) = target` for a monotone `f` on `[lo, hi]`.
///
/// Runs exactly `⌈log2((hi - lo) / tol)⌉` halvings and returns the midpoint
/// of the last bracket. When `target` is not bracketed by `f(lo)` and `f(hi)`
/// the endpoint whose value is nearer the target is returned.
pub fn bisect_monotone<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    target: f64,
    tol: f64,
) -> f64 {
    let f_lo = f(lo);
    let f_hi = f(hi);
    let increasing = f_lo <= f_hi;
    let (min, max) = if increasing {
        (f_lo, f_hi)
    } else {
        (f_hi, f_lo)
    };
    if target <= min || target >= max {
        return if (f_lo - target).abs() <= (f_hi - target).abs() {
            lo
        } else {
            hi
        };
    }
    let (l, h) = bisect_boundary(
        |x| {
            let v = f(x);
            if increasing {
                v >= target
            } else {
                v <= target
            }
        },
        lo,
        hi,
        tol,
    );
    0.5 * (l + h)
}
