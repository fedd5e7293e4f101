//! One-dimensional bracketed minimization.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `f` on `[a, b]`; returns `(x, f(x))`.
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
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
        iter += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, p| if p.1 < best.1 { p } else { best })
}

/// Refines a maximum (`maximize = true`) or minimum of `f` inside `[a, b]`.
pub fn refine_extremum<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, maximize: bool, tol: f64) -> (f64, f64) {
    let sign = if maximize { -1.0 } else { 1.0 };
    let (x, v) = golden_section_min(|x| sign * f(x), a, b, tol);
    (x, sign * v)
}
