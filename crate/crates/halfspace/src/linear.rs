//! Linear evolution `d/dt v = J * v - v` on the periodic box and the
//! quantitative checks attached to it: the sup-norm decay rate
//! `(1 + t)^{-(N+1)/beta}`, conservation of the signed first moment, the
//! moving-probe lower bound at `x = gamma t^{1/beta} e_N`, and the cutoff
//! commutator bounds behind the blow-up argument.
//!
//! The probe constant is
//! `C1(gamma) = integral of exp(-a |z|^beta) z_N sin(gamma z_N) dz`,
//! evaluated by nested adaptive quadrature with a radial reduction of the
//! transverse directions. Against the solution it appears as the plateau
//! `t^{(N+1)/beta} v(t, gamma t^{1/beta} e_N) -> 2 (2 pi)^{-N} C1(gamma) m1`
//! for odd-extended data with half-space moment `m1`.

use crate::error::{Error, Result};
use crate::fields::{
    forward_dft, fourier_l1_norm, moment_m1, odd_extend, project_even, project_odd, Field, Grid,
    HalfField, Symmetry,
};
use crate::kernels::{convolve_spectral, validate_kernel_samples};
use crate::quad::adaptive_simpson;
use crate::symbols::{fit_line, DiffusionSymbol};
use crate::fft;
use ndarray::{ArrayD, Dimension};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Data smallness gauge for the global-existence regime: half-space first
/// moment plus the `L1` norm of the transform of the odd extension.
pub fn data_norm(u0: &HalfField) -> f64 {
    let odd = odd_extend(u0);
    moment_m1(u0) + fourier_l1_norm(&odd)
}

/// One-time spectral setup for evolving a fixed initial field to many times.
pub struct LinearFlow {
    grid: Grid,
    j0: ArrayD<f64>,
    data_hat: ArrayD<Complex64>,
    symmetry: Symmetry,
}

impl LinearFlow {
    pub fn new(field: &Field, symbol: &DiffusionSymbol) -> Result<LinearFlow> {
        let j0 = symbol.on_grid(&field.grid)?;
        Ok(LinearFlow {
            grid: field.grid,
            j0,
            data_hat: forward_dft(field),
            symmetry: field.symmetry,
        })
    }

    /// The solution at time `t >= 0`. Oddness or evenness of the data is
    /// preserved exactly by the real even multiplier, so the matching
    /// projection only strips FFT roundoff and reinstates the certificate.
    pub fn at(&self, t: f64) -> Result<Field> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("evolution time t = {t} must be nonnegative")));
        }
        let mut freq = self.data_hat.clone();
        freq.zip_mut_with(&self.j0, |c, &j| *c *= (t * (j - 1.0)).exp());
        let mut values = fft::inverse_real(&freq, self.grid.dx());
        match self.symmetry {
            Symmetry::OddInXn => project_odd(&mut values),
            Symmetry::EvenInXn => project_even(&mut values),
            Symmetry::None => {}
        }
        Ok(Field { grid: self.grid, values, symmetry: self.symmetry })
    }
}

/// Evolve `field` once to time `t`.
pub fn propagate_linear(field: &Field, symbol: &DiffusionSymbol, t: f64) -> Result<Field> {
    LinearFlow::new(field, symbol)?.at(t)
}

// ---------------------------------------------------------------------------
// Probe constant C1 and the moving probe.

/// `C1(gamma)` by nested adaptive quadrature. The transverse directions are
/// reduced to a radial profile, so dimensions 1 to 3 are supported:
/// `C1 = 2 int_0^S z sin(gamma z) g(z) dz` with `g` the transverse integral
/// of `exp(-a |(z', z)|^beta)`.
pub fn compute_c1(a: f64, beta: f64, dim: usize, gamma: f64) -> Result<f64> {
    compute_c1_with_tol(a, beta, dim, gamma, 1e-11)
}

pub fn compute_c1_with_tol(a: f64, beta: f64, dim: usize, gamma: f64, tol: f64) -> Result<f64> {
    check_c1_args(a, beta, dim)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Config(format!("probe parameter gamma = {gamma} must be nonnegative")));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let reach = support_radius(a, beta);
    let inner_tol = tol / (10.0 * reach.max(1.0));
    let outer = adaptive_simpson(
        &|z: f64| z * (gamma * z).sin() * transverse_profile(a, beta, dim, z, inner_tol),
        0.0,
        reach,
        tol,
    );
    Ok(2.0 * outer.value)
}

/// Slope of `C1` at `gamma = 0`: the limit integral
/// `integral of exp(-a |z|^beta) z_N^2 dz`.
pub fn c1_slope_at_zero(a: f64, beta: f64, dim: usize) -> Result<f64> {
    check_c1_args(a, beta, dim)?;
    let reach = support_radius(a, beta);
    let inner_tol = 1e-12 / reach.max(1.0);
    let outer = adaptive_simpson(
        &|z: f64| z * z * transverse_profile(a, beta, dim, z, inner_tol),
        0.0,
        reach,
        1e-11,
    );
    Ok(2.0 * outer.value)
}

fn check_c1_args(a: f64, beta: f64, dim: usize) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Config(format!("expansion coefficient a = {a} must be positive")));
    }
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Config(format!("expansion order beta = {beta} outside (0, 2]")));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::Config(format!(
            "probe constant supports dimensions 1 to 3, got {dim}"
        )));
    }
    Ok(())
}

/// Radius beyond which `exp(-a r^beta)` is below 1e-20.
fn support_radius(a: f64, beta: f64) -> f64 {
    (46.1 / a).powf(1.0 / beta)
}

/// `g(z)`: the weight `exp(-a |(z', z)|^beta)` integrated over the
/// transverse variable `z'` (empty for `dim = 1`, a line for `dim = 2`, a
/// plane in polar form for `dim = 3`).
fn transverse_profile(a: f64, beta: f64, dim: usize, z: f64, tol: f64) -> f64 {
    let reach = support_radius(a, beta);
    let radial = |r2: f64| (-a * r2.powf(beta / 2.0)).exp();
    match dim {
        1 => radial(z * z),
        2 => 2.0 * adaptive_simpson(&|s: f64| radial(s * s + z * z), 0.0, reach, tol).value,
        _ => {
            2.0 * PI
                * adaptive_simpson(&|r: f64| r * radial(r * r + z * z), 0.0, reach, tol).value
        }
    }
}

/// Coarse argmax of `C1` over the probe-parameter scan grid `k/64`,
/// `k = 1..64`.
pub fn best_gamma(a: f64, beta: f64, dim: usize) -> Result<f64> {
    check_c1_args(a, beta, dim)?;
    let mut best = (1.0 / 64.0, f64::NEG_INFINITY);
    for k in 1..=64 {
        let gamma = k as f64 / 64.0;
        let c1 = compute_c1_with_tol(a, beta, dim, gamma, 1e-8)?;
        if c1 > best.1 {
            best = (gamma, c1);
        }
    }
    Ok(best.0)
}

#[derive(Clone, Copy, Debug)]
pub struct ProbeEntry {
    pub t: f64,
    /// Probe offset `gamma t^{1/beta}` along the inward normal.
    pub position: f64,
    pub value: f64,
    /// `t^{(N+1)/beta}` times the probe value; flat in `t` once the
    /// first-moment asymptotics dominate.
    pub scaled: f64,
    /// The probe left the trustworthy half of the box; periodization makes
    /// the value unreliable.
    pub truncated: bool,
}

/// Sample the field at the moving probe point.
pub fn probe_value(field: &Field, beta: f64, gamma: f64, t: f64) -> Result<ProbeEntry> {
    let grid = field.grid;
    let position = gamma * t.powf(1.0 / beta);
    let mut x = vec![0.0; grid.dim()];
    x[grid.dim() - 1] = position;
    let value = field.sample_linear(&x)?;
    let rate = (grid.dim() as f64 + 1.0) / beta;
    Ok(ProbeEntry {
        t,
        position,
        value,
        scaled: value * t.powf(rate),
        truncated: position >= grid.half_width() / 2.0,
    })
}

// ---------------------------------------------------------------------------
// Verification reports for the linear estimates.

#[derive(Clone, Debug)]
pub struct DecayReport {
    /// `-(N+1)/beta`.
    pub expected_slope: f64,
    pub fitted_slope: f64,
    pub slope_tol: f64,
    /// `sup_t ||v(t)||_inf (1+t)^{(N+1)/beta} / data_norm` over the sampled
    /// times including `t = 0`; the effective constant of the decay bound.
    pub c_decay: f64,
    pub data_norm: f64,
    /// `(t, sup norm)` at the fit times.
    pub samples: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Measure the sup-norm decay of the linear flow from odd-extended data on a
/// log-spaced time window and fit its rate.
pub fn verify_decay_upper(
    symbol: &DiffusionSymbol,
    u0: &HalfField,
    window: (f64, f64),
    n_samples: usize,
    slope_tol: f64,
) -> Result<DecayReport> {
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::Config(format!(
            "fit window ({}, {}) must satisfy 0 < start < end",
            window.0, window.1
        )));
    }
    if n_samples < 4 {
        return Err(Error::Config("rate fit needs at least 4 samples".into()));
    }
    if u0.is_zero() {
        return Err(Error::Config("decay rate of zero data is undefined".into()));
    }
    let odd = odd_extend(u0);
    let norm = data_norm(u0);
    let flow = LinearFlow::new(&odd, symbol)?;
    let rate = (odd.grid.dim() as f64 + 1.0) / symbol.beta();

    let mut samples = Vec::with_capacity(n_samples);
    let ratio = (window.1 / window.0).ln();
    for i in 0..n_samples {
        let t = window.0 * (ratio * i as f64 / (n_samples - 1) as f64).exp();
        samples.push((t, flow.at(t)?.sup_norm()));
    }
    let mut c_decay = odd.sup_norm() / norm;
    for &(t, sup) in &samples {
        c_decay = c_decay.max(sup * (1.0 + t).powf(rate) / norm);
    }
    let lx: Vec<f64> = samples.iter().map(|(t, _)| t.ln()).collect();
    let ly: Vec<f64> = samples.iter().map(|(_, s)| s.ln()).collect();
    let (fitted_slope, _) = fit_line(&lx, &ly);
    let expected_slope = -rate;
    Ok(DecayReport {
        expected_slope,
        fitted_slope,
        slope_tol,
        c_decay,
        data_norm: norm,
        samples,
        pass: (fitted_slope - expected_slope).abs() <= slope_tol,
    })
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub gamma: f64,
    pub c1: f64,
    /// `2 (2 pi)^{-N} C1(gamma) m1`.
    pub expected_plateau: f64,
    pub entries: Vec<ProbeEntry>,
    /// Largest relative deviation of the scaled probe from the plateau over
    /// the later half of the window.
    pub max_rel_dev: f64,
    pub pass: bool,
}

/// Track the moving probe under the linear flow and compare the scaled
/// values against the first-moment plateau. `rel_tol` applies to the later
/// half of the log-spaced window, where the asymptotics have set in.
pub fn verify_probe_lower(
    symbol: &DiffusionSymbol,
    u0: &HalfField,
    gamma: f64,
    window: (f64, f64),
    n_samples: usize,
    rel_tol: f64,
) -> Result<ProbeReport> {
    if !(window.0 > 0.0 && window.1 > window.0) {
        return Err(Error::Config(format!(
            "probe window ({}, {}) must satisfy 0 < start < end",
            window.0, window.1
        )));
    }
    if n_samples < 4 {
        return Err(Error::Config("probe tracking needs at least 4 samples".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::Config(format!("probe parameter gamma = {gamma} must be positive")));
    }
    let odd = odd_extend(u0);
    let grid = odd.grid;
    let m1 = moment_m1(u0);
    if m1 <= 0.0 {
        return Err(Error::Config("probe plateau needs data with positive first moment".into()));
    }
    let beta = symbol.beta();
    let c1 = compute_c1(symbol.a(), beta, grid.dim(), gamma)?;
    let expected_plateau = 2.0 * (2.0 * PI).powi(-(grid.dim() as i32)) * c1 * m1;
    let flow = LinearFlow::new(&odd, symbol)?;

    let mut entries = Vec::with_capacity(n_samples);
    let ratio = (window.1 / window.0).ln();
    for i in 0..n_samples {
        let t = window.0 * (ratio * i as f64 / (n_samples - 1) as f64).exp();
        entries.push(probe_value(&flow.at(t)?, beta, gamma, t)?);
    }
    let late = &entries[n_samples / 2..];
    let mut max_rel_dev = 0.0f64;
    let mut usable = true;
    for e in late {
        if e.truncated {
            usable = false;
        }
        max_rel_dev = max_rel_dev.max((e.scaled - expected_plateau).abs() / expected_plateau);
    }
    Ok(ProbeReport {
        gamma,
        c1,
        expected_plateau,
        entries,
        max_rel_dev,
        pass: usable && max_rel_dev <= rel_tol,
    })
}

#[derive(Clone, Debug)]
pub struct MomentReport {
    pub initial: f64,
    /// `(t, m1)` at the requested times.
    pub samples: Vec<(f64, f64)>,
    pub max_rel_drift: f64,
    pub pass: bool,
}

/// The signed first moment of the odd extension is a conserved quantity of
/// the linear flow; measure its drift at the requested times.
pub fn verify_moment_conserved(
    symbol: &DiffusionSymbol,
    u0: &HalfField,
    times: &[f64],
    tol: f64,
) -> Result<MomentReport> {
    if times.is_empty() {
        return Err(Error::Config("moment check needs at least one time".into()));
    }
    let initial = moment_m1(u0);
    if initial <= 0.0 {
        return Err(Error::Config("moment drift of zero data is undefined".into()));
    }
    let odd = odd_extend(u0);
    let flow = LinearFlow::new(&odd, symbol)?;
    let mut samples = Vec::with_capacity(times.len());
    let mut max_rel_drift = 0.0f64;
    for &t in times {
        let restricted = crate::fields::restrict_to_halfspace(&flow.at(t)?)?;
        let m1 = moment_m1(&restricted);
        max_rel_drift = max_rel_drift.max((m1 - initial).abs() / initial);
        samples.push((t, m1));
    }
    Ok(MomentReport { initial, samples, max_rel_drift, pass: max_rel_drift <= tol })
}

// ---------------------------------------------------------------------------
// Cutoff commutator bounds.

/// Smooth transition profile: 1 on `[0, 1]`, 0 on `[2, inf)`, C-infinity in
/// between via the standard exponential partition.
pub fn cutoff_profile(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let phi = |r: f64| if r > 0.0 { (-1.0 / r).exp() } else { 0.0 };
        phi(2.0 - s) / (phi(2.0 - s) + phi(s - 1.0))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TruncationEntry {
    pub radius: f64,
    /// Smallest signed value of `sign(x_N) (A psi_R)(x)` over `|x| >= 2R`;
    /// the commutator must not push mass inward out there.
    pub far_field_min: f64,
    /// `R^beta sup_x |(A psi_R)(x)| / |x_N|`; flat in `R` when the
    /// commutator obeys the `R^{-beta}` envelope.
    pub scaled_sup: f64,
}

#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub entries: Vec<TruncationEntry>,
    /// Max over min of `scaled_sup` across the radii.
    pub ratio_spread: f64,
    pub pass: bool,
}

/// Check the truncated-moment machinery: with `psi_R(x) = x_N rho(|x|/R)`
/// and `A f = J * f - f`, the far field of `A psi_R` must carry the sign of
/// `x_N` (up to 1e-10) and its weighted sup must scale like `R^{-beta}`.
pub fn verify_truncation_bounds(
    kernel: &Field,
    beta: f64,
    radii: &[f64],
) -> Result<TruncationReport> {
    validate_kernel_samples(kernel)?;
    if radii.is_empty() {
        return Err(Error::Config("truncation check needs at least one radius".into()));
    }
    let grid = kernel.grid;
    for &r in radii {
        if !(r > 0.0) || 2.0 * r > grid.half_width() / 2.0 {
            return Err(Error::Config(format!(
                "cutoff radius {r} must satisfy 0 < 2R <= L/2 to keep the far field in the box"
            )));
        }
    }
    let mut entries = Vec::with_capacity(radii.len());
    for &radius in radii {
        let psi = psi_field(grid, radius);
        let conv = convolve_spectral(kernel, &psi)?;
        let mut far_field_min = f64::INFINITY;
        let mut weighted_sup = 0.0f64;
        for (ix, &c) in conv.values.indexed_iter() {
            let a_psi = c - psi.values[ix.clone()];
            let xn = grid.coord(ix.slice()[grid.dim() - 1]);
            if xn == 0.0 {
                continue;
            }
            let r = grid.coord_norm(ix.slice());
            if r >= 2.0 * radius {
                far_field_min = far_field_min.min(xn.signum() * a_psi);
            }
            weighted_sup = weighted_sup.max(a_psi.abs() / xn.abs());
        }
        entries.push(TruncationEntry {
            radius,
            far_field_min,
            scaled_sup: radius.powf(beta) * weighted_sup,
        });
    }
    let hi = entries.iter().map(|e| e.scaled_sup).fold(f64::NEG_INFINITY, f64::max);
    let lo = entries.iter().map(|e| e.scaled_sup).fold(f64::INFINITY, f64::min);
    let ratio_spread = hi / lo;
    let pass = entries.iter().all(|e| e.far_field_min >= -1e-10) && ratio_spread < 2.0;
    Ok(TruncationReport { entries, ratio_spread, pass })
}

/// `psi_R(x) = x_N rho(|x| / R)`: the linear weight truncated at scale `R`.
fn psi_field(grid: Grid, radius: f64) -> Field {
    let dim = grid.dim();
    Field::from_fn(
        grid,
        |x| {
            let r: f64 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            x[dim - 1] * cutoff_profile(r / radius)
        },
        Symmetry::OddInXn,
    )
    .expect("x_N rho(|x|/R) is odd in x_N by construction")
}
