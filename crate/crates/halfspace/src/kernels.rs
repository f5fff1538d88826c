//! Semigroup kernels generated by a diffusion symbol.
//!
//! The linear flow has the Fourier representation
//! `F(G(t))(xi) = exp(t (J0(xi) - 1))`. For the closed-form families this is
//! a smooth density; for a jump kernel `J` the measure splits as
//! `G(t) = exp(-t) delta_0 + absolutely continuous part`, and the atom is
//! kept symbolic in [`KernelSnapshot::dirac_weight`] rather than smeared
//! over a lattice cell.
//!
//! Two independent routes to the jump-family kernel exist on purpose:
//! multiplier synthesis ([`kernel_from_symbol`]) and the exponential series
//! `exp(-t) sum t^k/k! J^{*k}` evaluated by direct spatial convolution
//! ([`poisson_series_kernel`]). Their agreement is a cross-check of both.

use crate::error::{Error, Result};
use crate::fft;
use crate::fields::{
    even_defect, forward_dft, inverse_dft, kahan_sum, project_even, Field, Grid, Symmetry,
};
use crate::symbols::DiffusionSymbol;
use ndarray::{ArrayD, Dimension, IxDyn};
use num_complex::Complex64;
use std::f64::consts::PI;

/// The kernel of the linear semigroup at a fixed time, sampled on the box.
#[derive(Clone, Debug)]
pub struct KernelSnapshot {
    pub t: f64,
    /// Absolutely continuous part, sampled on the lattice. Even in `x_N`.
    pub values: Field,
    /// Weight of the atom at the origin; `exp(-t)` for jump kernels, zero
    /// for the regularizing families.
    pub dirac_weight: f64,
    /// Non-fatal synthesis diagnostics (resolution, periodization,
    /// negativity at noise level).
    pub warnings: Vec<String>,
}

impl KernelSnapshot {
    /// Total discrete mass including the atom. Equals the multiplier at
    /// frequency zero by the inversion identity, so it is 1 to roundoff for
    /// an admissible symbol.
    pub fn total_mass(&self) -> f64 {
        self.values.mass() + self.dirac_weight
    }
}

/// Shared admissibility check for sampled jump kernels: nonnegative, even in
/// the last coordinate, unit discrete mass.
pub(crate) fn validate_kernel_samples(samples: &Field) -> Result<()> {
    let min = samples.min_value();
    if min < -1e-12 {
        return Err(Error::Config(format!("kernel samples must be nonnegative (min {min:.3e})")));
    }
    let defect = even_defect(&samples.values);
    if defect > 1e-12 * (1.0 + samples.sup_norm()) {
        return Err(Error::Config(format!(
            "kernel samples must be even in the last coordinate (defect {defect:.3e})"
        )));
    }
    let mass = samples.mass();
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::Config(format!(
            "kernel samples must have unit discrete mass (got {mass}); rescale them first"
        )));
    }
    Ok(())
}

/// Synthesize the semigroup kernel at time `t` on `grid` by inverting the
/// multiplier `exp(t (J0 - 1))`. For jump symbols the atom `exp(-t) delta_0`
/// is removed in frequency space first, so `values` holds only the
/// absolutely continuous part.
pub fn kernel_from_symbol(
    symbol: &DiffusionSymbol,
    t: f64,
    grid: &Grid,
) -> Result<KernelSnapshot> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("snapshot time t = {t} must be positive")));
    }
    let j0 = symbol.on_grid(grid)?;
    let is_jump = symbol.kernel_samples().is_some();
    let atom = if is_jump { (-t).exp() } else { 0.0 };
    let freq = j0.mapv(|j| Complex64::new((t * (j - 1.0)).exp() - atom, 0.0));
    let mut field = inverse_dft(&freq, grid)?;
    project_even(&mut field.values);
    field.symmetry = Symmetry::EvenInXn;

    let mut warnings = Vec::new();
    if !is_jump {
        // Regularizing families must kill the Nyquist modes, otherwise the
        // lattice is too coarse for this time.
        let corner = grid.nyquist() * (grid.dim() as f64).sqrt();
        let corner_xi = vec![grid.nyquist(); grid.dim()];
        let m = (t * (symbol.eval(&corner_xi)? - 1.0)).exp();
        if m > 1e-12 {
            warnings.push(format!(
                "multiplier {m:.3e} at the Nyquist corner |xi| = {corner:.3}; grid too coarse for t = {t}"
            ));
        }
    }
    let outside = mass_outside_half_box(&field);
    if outside > 1e-10 {
        warnings.push(format!(
            "kernel mass {outside:.3e} outside |x| <= L/2; enlarge the box to avoid wraparound"
        ));
    }
    let min = field.min_value();
    if min < -1e-12 {
        warnings.push(format!("kernel values dip to {min:.3e}; synthesis is under-resolved"));
    }
    Ok(KernelSnapshot { t, values: field, dirac_weight: atom, warnings })
}

/// Heuristic periodization gauge: absolute mass in the outer shell
/// (Euclidean `|x| > L/2`) of the sampled kernel itself.
fn mass_outside_half_box(field: &Field) -> f64 {
    let grid = field.grid;
    let half = grid.half_width() / 2.0;
    grid.cell_volume()
        * kahan_sum(field.values.indexed_iter().filter_map(|(ix, &v)| {
            if grid.coord_norm(ix.slice()) > half {
                Some(v.abs())
            } else {
                None
            }
        }))
}

/// Closed-form heat kernel `(4 pi t)^{-N/2} exp(-|x|^2 / 4t)`; the oracle for
/// the Laplacian family.
pub fn heat_kernel_closed_form(t: f64, x: &[f64]) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("heat kernel time t = {t} must be positive")));
    }
    if x.is_empty() {
        return Err(Error::Config("heat kernel needs at least one coordinate".into()));
    }
    let r2: f64 = x.iter().map(|c| c * c).sum();
    let dim = x.len() as f64;
    Ok((4.0 * PI * t).powf(-dim / 2.0) * (-r2 / (4.0 * t)).exp())
}

/// Exponential series route to the jump-family kernel:
/// `exp(-t) sum_{k=1}^{k_max} (t^k / k!) J^{*k}` with every convolution done
/// by direct spatial summation. Returns the snapshot and the dropped series
/// mass `exp(-t) sum_{k > k_max} t^k / k!`.
pub fn poisson_series_kernel(
    samples: &Field,
    t: f64,
    k_max: usize,
) -> Result<(KernelSnapshot, f64)> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("series time t = {t} must be positive")));
    }
    if k_max == 0 {
        return Err(Error::Config("series order k_max must be at least 1".into()));
    }
    validate_kernel_samples(samples)?;
    let grid = samples.grid;
    let atom = (-t).exp();

    let mut weight = atom * t; // exp(-t) t^1 / 1!
    let mut power = samples.clone();
    let mut acc = power.values.mapv(|v| weight * v);
    for k in 2..=k_max {
        power = convolve_direct(&power, samples)?;
        weight *= t / k as f64;
        acc.zip_mut_with(&power.values, |a, &p| *a += weight * p);
    }
    // Tail of the Poisson weights beyond k_max.
    let mut tail = 0.0;
    let mut term = weight * t / (k_max as f64 + 1.0);
    let mut k = k_max + 1;
    while term > tail * 1e-18 + 1e-300 {
        tail += term;
        k += 1;
        term *= t / k as f64;
    }

    let mut field = Field { grid, values: acc, symmetry: Symmetry::EvenInXn };
    project_even(&mut field.values);
    Ok((KernelSnapshot { t, values: field, dirac_weight: atom, warnings: Vec::new() }, tail))
}

/// Direct periodic convolution `(f * g)(x_i) = dx^N sum_j f(x_j) g(x_{i-j})`,
/// quadratic in the lattice size. Kept for cross-checks that must not share
/// the FFT code path; use [`convolve_spectral`] for production work.
pub fn convolve_direct(f: &Field, g: &Field) -> Result<Field> {
    if f.grid != g.grid {
        return Err(Error::Config("convolution operands live on different grids".into()));
    }
    let grid = f.grid;
    let cells: usize = grid.shape().iter().product();
    if (cells as f64) * (cells as f64) > 3e8 {
        return Err(Error::Config(format!(
            "direct convolution on {cells} cells is too expensive; use the spectral route"
        )));
    }
    let n = grid.points();
    let dim = grid.dim();
    let shape = grid.shape();
    let mut out = ArrayD::zeros(IxDyn(&shape));
    let fv = &f.values;
    let gv = &g.values;
    let mut diff = vec![0usize; dim];
    for (out_ix, o) in out.indexed_iter_mut() {
        let oi = out_ix.slice();
        let mut sum = 0.0;
        let mut carry = 0.0;
        for (j_ix, &fj) in fv.indexed_iter() {
            if fj == 0.0 {
                continue;
            }
            let ji = j_ix.slice();
            // Coordinate x_i - x_j sits at index i - j + n/2: the lattice
            // origin is the center cell, not index 0.
            for d in 0..dim {
                diff[d] = (oi[d] + n + n / 2 - ji[d]) % n;
            }
            let x = fj * gv[IxDyn(&diff)];
            let y = x - carry;
            let t = sum + y;
            carry = (t - sum) - y;
            sum = t;
        }
        *o = grid.cell_volume() * sum;
    }
    Ok(Field { grid, values: out, symmetry: Symmetry::None })
}

/// Spectral periodic convolution through the scaled transforms; the
/// convolution theorem makes this the product of the forward transforms.
pub fn convolve_spectral(f: &Field, g: &Field) -> Result<Field> {
    if f.grid != g.grid {
        return Err(Error::Config("convolution operands live on different grids".into()));
    }
    let mut fa = forward_dft(f);
    let gb = forward_dft(g);
    fa.zip_mut_with(&gb, |a, &b| *a *= b);
    Ok(Field {
        grid: f.grid,
        values: fft::inverse_real(&fa, f.grid.dx()),
        symmetry: Symmetry::None,
    })
}

/// Reflected half-space kernel
/// `K(t, x, y) = G(t, x'-y', x_N - y_N) - G(t, x'-y', x_N + y_N)` evaluated
/// from the sampled snapshot by multilinear interpolation. Only the
/// absolutely continuous part enters; the atom of a jump kernel has no
/// pointwise value. Nonnegative whenever the snapshot is nonincreasing in
/// `x_N`, and zero when either point sits on the boundary.
pub fn halfspace_kernel(snapshot: &KernelSnapshot, x: &[f64], y: &[f64]) -> Result<f64> {
    let grid = snapshot.values.grid;
    let dim = grid.dim();
    if x.len() != dim || y.len() != dim {
        return Err(Error::Config(format!(
            "points of dimension {}/{} do not match the kernel dimension {dim}",
            x.len(),
            y.len()
        )));
    }
    if x[dim - 1] < 0.0 || y[dim - 1] < 0.0 {
        return Err(Error::Config(
            "half-space kernel arguments must satisfy x_N >= 0 and y_N >= 0".into(),
        ));
    }
    let mut d_minus = vec![0.0; dim];
    let mut d_plus = vec![0.0; dim];
    for i in 0..dim {
        d_minus[i] = x[i] - y[i];
        d_plus[i] = x[i] - y[i];
    }
    d_plus[dim - 1] = x[dim - 1] + y[dim - 1];
    let g_minus = snapshot.values.sample_linear(&d_minus)?;
    let g_plus = snapshot.values.sample_linear(&d_plus)?;
    Ok(g_minus - g_plus)
}

/// True iff every `x'` slice of the field is nonincreasing along `x_N` on
/// `[0, L)`, with slack `1e-12 (1 + sup)` for ties at roundoff level.
pub fn check_monotone_in_xn(field: &Field) -> bool {
    let n = field.grid.points();
    let tol = 1e-12 * (1.0 + field.sup_norm());
    let last = ndarray::Axis(field.grid.dim() - 1);
    for lane in field.values.lanes(last) {
        for j in n / 2..n - 1 {
            if lane[j + 1] > lane[j] + tol {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug)]
pub struct RadialMonotoneCheck {
    pub output: Field,
    /// Whether the convolution is again even and nonincreasing away from 0.
    pub preserved: bool,
}

/// Convolve two 1-D even, radially nonincreasing kernels (direct summation)
/// and check that the result is again even and nonincreasing. The inputs are
/// validated; a violation there is an error, not a `false`.
pub fn convolve_preserves_radial_monotone(f: &Field, g: &Field) -> Result<RadialMonotoneCheck> {
    if f.grid.dim() != 1 {
        return Err(Error::Config("radial monotonicity check is defined for 1-D kernels".into()));
    }
    for (name, k) in [("first", f), ("second", g)] {
        let defect = even_defect(&k.values);
        if defect > 1e-12 * (1.0 + k.sup_norm()) {
            return Err(Error::Config(format!("{name} kernel is not even (defect {defect:.3e})")));
        }
        if !check_monotone_in_xn(k) {
            return Err(Error::Config(format!("{name} kernel is not nonincreasing on (0, L)")));
        }
    }
    let mut output = convolve_direct(f, g)?;
    let even_ok = even_defect(&output.values) <= 1e-12 * (1.0 + output.sup_norm());
    if even_ok {
        output.symmetry = Symmetry::EvenInXn;
    }
    let preserved = even_ok && check_monotone_in_xn(&output);
    Ok(RadialMonotoneCheck { output, preserved })
}
