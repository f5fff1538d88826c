//! Adaptive Simpson quadrature for the handful of continuum integrals the
//! verification layer needs (probe constants, cutoff calibrations). Not a
//! general-purpose integrator; finite intervals only.

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated Richardson error estimate of the accepted panels.
    pub error_estimate: f64,
    /// Some panel hit the recursion cap before meeting its tolerance; the
    /// estimate is then untrustworthy near that panel.
    pub depth_capped: bool,
}

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` by adaptive
/// Simpson with Richardson acceptance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> QuadResult {
    assert!(b >= a, "integration bounds out of order");
    assert!(tol > 0.0, "tolerance must be positive");
    if a == b {
        return QuadResult { value: 0.0, error_estimate: 0.0, depth_capped: false };
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    let mut out = QuadResult { value: 0.0, error_estimate: 0.0, depth_capped: false };
    refine(f, a, b, fa, fm, fb, whole, tol, 0, &mut out);
    out
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    out: &mut QuadResult,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        out.depth_capped = true;
        return;
    }
    if delta.abs() <= 15.0 * tol {
        out.value += left + right + delta / 15.0;
        out.error_estimate += delta.abs() / 15.0;
        return;
    }
    refine(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1, out);
    refine(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1, out);
}
