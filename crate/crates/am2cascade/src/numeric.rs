//! Small scalar root-finding and minimisation helpers.

/// Bisection on a bracket `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// Stops when the bracket is narrower than `tol(x)` or after `max_iter`
/// halvings, and returns whichever of the last endpoints has the smaller
/// residual.
pub fn bisect<F, T>(mut f: F, mut lo: f64, mut hi: f64, tol: T, max_iter: usize) -> f64
where
    F: FnMut(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= tol(mid) || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if flo.abs() <= fhi.abs() {
        lo
    } else {
        hi
    }
}

/// Golden-section search for a minimiser of a unimodal `f` on `[a, b]`.
pub fn golden_min<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `n` points spaced evenly in log10 between `lo` and `hi` (both > 0).
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, |_| 1e-14, 200);
        assert!((x - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_handles_decreasing_functions() {
        let x = bisect(|x| 1.0 - x, 0.0, 3.0, |_| 1e-12, 200);
        assert!((x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 100);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logspace_endpoints() {
        let v = logspace(1e-3, 1e3, 7);
        assert_eq!(v.len(), 7);
        assert!((v[0] - 1e-3).abs() < 1e-15);
        assert!((v[3] - 1.0).abs() < 1e-12);
        assert!((v[6] - 1e3).abs() < 1e-9);
    }
}
