//! Fourier symbols of the admissible diffusion generators.
//!
//! A symbol `J0` drives the linear flow through the multiplier
//! `exp(t (J0(xi) - 1))`. Admissibility means three things: `J0(0) = 1`
//! (conservation of mass), a small-frequency expansion
//! `J0(xi) = 1 - a |xi|^beta + o(|xi|^beta)` with `a > 0` and
//! `0 < beta <= 2`, and strict high-frequency damping
//! `sup_{|xi| >= r} J0 < 1` for every `r > 0`. [`validate_assumptions`]
//! checks all three on a concrete lattice; the classical counterexample
//! (a symmetric pair of unit jumps, whose symbol `cos(xi)` returns to 1 at
//! `2 pi`) fails the third check and nothing else.

use crate::error::{Error, Result};
use crate::fields::{forward_dft, Field, Grid, Symmetry};
use ndarray::{ArrayD, Dimension};

#[derive(Clone, Debug)]
enum Family {
    Laplacian,
    FractionalLaplacian,
    Convolution(Field),
}

/// Symbol of the generator `A = J * . - Id` (convolution family) or of the
/// closed-form references `1 - |xi|^2` and `1 - |xi|^beta`.
#[derive(Clone, Debug)]
pub struct DiffusionSymbol {
    family: Family,
    a: f64,
    beta: f64,
}

impl DiffusionSymbol {
    /// The classical heat generator, `J0(xi) = 1 - |xi|^2`.
    pub fn laplacian() -> DiffusionSymbol {
        DiffusionSymbol { family: Family::Laplacian, a: 1.0, beta: 2.0 }
    }

    /// Stable generator of order `beta`, `J0(xi) = 1 - |xi|^beta`.
    pub fn fractional_laplacian(beta: f64) -> Result<DiffusionSymbol> {
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(Error::Config(format!("stable order beta = {beta} outside (0, 2]")));
        }
        Ok(DiffusionSymbol { family: Family::FractionalLaplacian, a: 1.0, beta })
    }

    /// Jump generator from sampled kernel data `J`, with the declared
    /// small-frequency expansion parameters `(a, beta)`.
    ///
    /// The samples must be nonnegative, even in the last coordinate and of
    /// unit discrete mass; violations are configuration errors (normalize
    /// before constructing).
    pub fn convolution(samples: Field, a: f64, beta: f64) -> Result<DiffusionSymbol> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Config(format!("expansion coefficient a = {a} must be positive")));
        }
        if !(beta > 0.0 && beta <= 2.0) {
            return Err(Error::Config(format!("expansion order beta = {beta} outside (0, 2]")));
        }
        crate::kernels::validate_kernel_samples(&samples)?;
        let mut samples = samples;
        samples.symmetry = Symmetry::EvenInXn;
        Ok(DiffusionSymbol { family: Family::Convolution(samples), a, beta })
    }

    /// Jump generator with `(a, beta)` estimated from the samples by the
    /// small-frequency fit on the default range.
    pub fn convolution_fitted(samples: Field) -> Result<DiffusionSymbol> {
        let provisional = DiffusionSymbol::convolution(samples, 1.0, 2.0)?;
        let (lo, hi) = provisional.expansion_fit_range()?;
        let fit = provisional.fit_small_frequency(lo, hi, 16)?;
        let Family::Convolution(samples) = provisional.family else { unreachable!() };
        DiffusionSymbol::convolution(samples, fit.a_hat, fit.beta_hat)
    }

    /// Expansion coefficient of `1 - J0` at the origin.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Expansion order; the decay rates `(N+1)/beta` and the critical
    /// exponent `beta/(N+1)` are read from this value.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Laplacian => "laplacian",
            Family::FractionalLaplacian => "fractional_laplacian",
            Family::Convolution(_) => "convolution",
        }
    }

    pub fn kernel_samples(&self) -> Option<&Field> {
        match &self.family {
            Family::Convolution(samples) => Some(samples),
            _ => None,
        }
    }

    /// Dimension constraint imposed by sampled kernels, if any.
    pub fn required_dim(&self) -> Option<usize> {
        self.kernel_samples().map(|s| s.grid.dim())
    }

    /// Evaluate `J0` at an arbitrary frequency. For sampled kernels this is
    /// the semidiscrete transform of the samples, real by evenness.
    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        match &self.family {
            Family::Laplacian => {
                let r2: f64 = xi.iter().map(|c| c * c).sum();
                Ok(1.0 - r2)
            }
            Family::FractionalLaplacian => {
                let r: f64 = xi.iter().map(|c| c * c).sum::<f64>().sqrt();
                Ok(1.0 - r.powf(self.beta))
            }
            Family::Convolution(samples) => {
                let value = samples.transform_at(xi)?;
                Ok(value.re)
            }
        }
    }

    /// `J0` on the full frequency lattice of `grid`, for multiplier
    /// construction. Sampled kernels must live on the same grid; their
    /// transform is checked to be real up to roundoff before the imaginary
    /// part is dropped.
    pub fn on_grid(&self, grid: &Grid) -> Result<ArrayD<f64>> {
        match &self.family {
            Family::Convolution(samples) => {
                if samples.grid != *grid {
                    return Err(Error::Config(
                        "kernel samples live on a different grid than the requested lattice"
                            .into(),
                    ));
                }
                let freq = forward_dft(samples);
                let scale = 1.0 + freq.iter().fold(0.0f64, |m, c| m.max(c.norm()));
                let worst_im = freq.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
                if worst_im > 1e-12 * scale {
                    return Err(Error::Numerics(format!(
                        "kernel transform has imaginary residue {worst_im:.3e}; samples not even"
                    )));
                }
                Ok(freq.mapv(|c| c.re))
            }
            _ => {
                let shape = grid.shape();
                Ok(ArrayD::from_shape_fn(ndarray::IxDyn(&shape), |ix| {
                    // closed forms cannot fail
                    let mut r2 = 0.0;
                    for &j in ix.slice() {
                        let f = grid.freq(j);
                        r2 += f * f;
                    }
                    match self.family {
                        Family::Laplacian => 1.0 - r2,
                        Family::FractionalLaplacian => 1.0 - r2.sqrt().powf(self.beta),
                        Family::Convolution(_) => unreachable!(),
                    }
                }))
            }
        }
    }

    /// Log-log least-squares fit of `1 - J0(xi)` against `|xi|` on
    /// `[xi_lo, xi_hi]`, sampled along the last axis. Returns the estimated
    /// `(a, beta)` and the largest relative residual of the fitted power law.
    pub fn fit_small_frequency(&self, xi_lo: f64, xi_hi: f64, samples: usize) -> Result<SymbolFit> {
        if !(xi_lo > 0.0 && xi_hi > xi_lo) {
            return Err(Error::Config(format!(
                "fit range [{xi_lo}, {xi_hi}] must satisfy 0 < lo < hi"
            )));
        }
        if samples < 8 {
            return Err(Error::Config("small-frequency fit needs at least 8 samples".into()));
        }
        let dim = self.required_dim().unwrap_or(1);
        let ratio = (xi_hi / xi_lo).ln();
        let mut lx = Vec::with_capacity(samples);
        let mut ly = Vec::with_capacity(samples);
        for i in 0..samples {
            let mag = xi_lo * (ratio * i as f64 / (samples - 1) as f64).exp();
            let mut xi = vec![0.0; dim];
            xi[dim - 1] = mag;
            let y = 1.0 - self.eval(&xi)?;
            if y <= 0.0 {
                return Err(Error::Numerics(format!(
                    "1 - J0({mag}) = {y} is not positive; shrink the fit range"
                )));
            }
            lx.push(mag.ln());
            ly.push(y.ln());
        }
        let (slope, intercept) = least_squares_line(&lx, &ly);
        let a_hat = intercept.exp();
        let beta_hat = slope;
        let mut max_rel = 0.0f64;
        for (x, y) in lx.iter().zip(ly.iter()) {
            let model = a_hat * (beta_hat * x).exp();
            let data = y.exp();
            max_rel = max_rel.max((data - model).abs() / model);
        }
        Ok(SymbolFit { a_hat, beta_hat, max_rel_residual: max_rel })
    }

    /// Check the three admissibility assumptions on a concrete lattice.
    ///
    /// `r` splits frequencies into the expansion zone and the tail; `tol` is
    /// the acceptance slack for the exact identities. The tail test requires
    /// `sup J0 < 1 - tol` over all lattice frequencies with `|xi| >= r`.
    pub fn validate_assumptions(&self, grid: &Grid, r: f64, tol: f64) -> Result<AssumptionReport> {
        if !(r > 0.0 && r < grid.nyquist()) {
            return Err(Error::Config(format!(
                "split radius r = {r} outside the lattice range (0, {})",
                grid.nyquist()
            )));
        }
        let j0 = self.on_grid(grid)?;
        let zero_defect = {
            let xi0 = vec![0.0; grid.dim()];
            (self.eval(&xi0)? - 1.0).abs()
        };
        let mut tail_sup = f64::NEG_INFINITY;
        let mut tail_seen = false;
        for (ix, &v) in j0.indexed_iter() {
            if grid.freq_norm(ix.slice()) >= r {
                tail_seen = true;
                tail_sup = tail_sup.max(v);
            }
        }
        if !tail_seen {
            return Err(Error::Config(format!(
                "no lattice frequency reaches |xi| >= {r}; refine the grid"
            )));
        }
        let (fit_lo, fit_hi) = self.expansion_fit_range()?;
        let fit = self.fit_small_frequency(fit_lo, fit_hi, 16)?;
        let mass_ok = zero_defect <= tol;
        let tail_ok = tail_sup < 1.0 - tol;
        let expansion_ok = fit.max_rel_residual <= EXPANSION_RESIDUAL_TOL;
        Ok(AssumptionReport {
            zero_defect,
            tail_sup,
            fit,
            mass_ok,
            tail_ok,
            expansion_ok,
            pass: mass_ok && tail_ok && expansion_ok,
        })
    }
}

/// Relative residual allowed for the `o(|xi|^beta)` remainder on the fit
/// range.
pub const EXPANSION_RESIDUAL_TOL: f64 = 0.05;

/// Where the power law stops being a good description of `1 - J0`; the fit
/// window ends at the first crossing of this level.
const EXPANSION_FIT_LEVEL: f64 = 0.02;

impl DiffusionSymbol {
    /// Adaptive window for the small-frequency fit. Any finite-range
    /// estimate of `(a, beta)` is biased by the `o(|xi|^beta)` remainder, so
    /// the window must sit where `1 - J0` is genuinely small; its upper end
    /// is the first crossing of [`EXPANSION_FIT_LEVEL`] along the last axis
    /// and the lower end two decades below.
    pub fn expansion_fit_range(&self) -> Result<(f64, f64)> {
        let cap = match self.kernel_samples() {
            Some(samples) => samples.grid.nyquist(),
            None => 1e3,
        };
        let hi = self.first_crossing(EXPANSION_FIT_LEVEL, cap)?;
        Ok((hi / 100.0, hi))
    }

    /// Smallest `xi > 0` with `1 - J0(xi e_N) >= threshold`, or `cap` if the
    /// level is never reached. Geometric march with a 25% step, then
    /// bisection inside the bracketing interval.
    fn first_crossing(&self, threshold: f64, cap: f64) -> Result<f64> {
        let dim = self.required_dim().unwrap_or(1);
        let gap = |mag: f64| -> Result<f64> {
            let mut xi = vec![0.0; dim];
            xi[dim - 1] = mag;
            Ok(1.0 - self.eval(&xi)?)
        };
        let mut prev = cap * 2f64.powi(-40);
        if gap(prev)? >= threshold {
            return Ok(prev);
        }
        loop {
            let next = (prev * 1.25).min(cap);
            if gap(next)? >= threshold {
                let mut lo = prev;
                let mut hi = next;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if gap(mid)? >= threshold {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(hi);
            }
            if next >= cap {
                return Ok(cap);
            }
            prev = next;
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SymbolFit {
    pub a_hat: f64,
    pub beta_hat: f64,
    pub max_rel_residual: f64,
}

#[derive(Clone, Debug)]
pub struct AssumptionReport {
    /// `|J0(0) - 1|`.
    pub zero_defect: f64,
    /// `sup J0` over lattice frequencies with `|xi| >= r`.
    pub tail_sup: f64,
    pub fit: SymbolFit,
    pub mass_ok: bool,
    pub tail_ok: bool,
    pub expansion_ok: bool,
    pub pass: bool,
}

/// Critical exponent of the half-space problem, `1 + beta / (N + 1)`.
pub fn fujita_exponent(beta: f64, dim: usize) -> Result<f64> {
    if !(beta > 0.0 && beta <= 2.0) {
        return Err(Error::Config(format!("beta = {beta} outside (0, 2]")));
    }
    if dim == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    Ok(1.0 + beta / (dim as f64 + 1.0))
}

fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Shared least-squares slope helper for log-log rate fits elsewhere in the
/// crate.
pub(crate) fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    least_squares_line(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::HalfField;
    use approx::assert_abs_diff_eq;
    use ndarray::IxDyn;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_values() {
        let lap = DiffusionSymbol::laplacian();
        assert_eq!(lap.eval(&[0.0]).unwrap(), 1.0);
        assert_eq!(lap.eval(&[1.0]).unwrap(), 0.0);
        let frac = DiffusionSymbol::fractional_laplacian(1.0).unwrap();
        assert_abs_diff_eq!(frac.eval(&[0.5]).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(frac.eval(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn fujita_exponent_values() {
        assert_abs_diff_eq!(fujita_exponent(2.0, 1).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fujita_exponent(2.0, 3).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(fujita_exponent(1.0, 1).unwrap(), 1.5, epsilon = 1e-15);
        assert!(fujita_exponent(2.5, 1).is_err());
        assert!(fujita_exponent(2.0, 0).is_err());
    }

    #[test]
    fn fit_recovers_closed_form_families() {
        let lap = DiffusionSymbol::laplacian();
        let fit = lap.fit_small_frequency(0.01, 0.1, 16).unwrap();
        assert_abs_diff_eq!(fit.a_hat, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.beta_hat, 2.0, epsilon = 1e-6);
        let frac = DiffusionSymbol::fractional_laplacian(1.5).unwrap();
        let fit = frac.fit_small_frequency(0.01, 0.1, 16).unwrap();
        assert_abs_diff_eq!(fit.a_hat, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.beta_hat, 1.5, epsilon = 1e-6);
    }

    #[test]
    fn gaussian_kernel_expansion_matches_half_variance() {
        // Transform of the unit-mass gaussian is exp(-sigma^2 xi^2 / 2), so
        // the expansion coefficient is sigma^2 / 2 at order two.
        let grid = Grid::new(1, 20.0, 1024).unwrap();
        for sigma in [1.0, 2.0] {
            let samples = Field::gaussian(grid, sigma).unwrap();
            let symbol = DiffusionSymbol::convolution_fitted(samples).unwrap();
            assert!((symbol.beta() - 2.0).abs() < 0.01, "beta {}", symbol.beta());
            let a_expected = sigma * sigma / 2.0;
            assert!(
                (symbol.a() - a_expected).abs() < 0.01 * a_expected,
                "a {} vs {}",
                symbol.a(),
                a_expected
            );
        }
    }

    #[test]
    fn laplacian_tail_supremum_on_matching_lattice() {
        // L = 4 pi makes xi = 0.5 an exact lattice frequency, so the sampled
        // tail supremum equals the analytic value 1 - r^2 = 0.75.
        let grid = Grid::new(1, 4.0 * PI, 256).unwrap();
        let report = DiffusionSymbol::laplacian().validate_assumptions(&grid, 0.5, 1e-9).unwrap();
        assert!(report.pass, "{report:?}");
        assert_abs_diff_eq!(report.tail_sup, 0.75, epsilon = 1e-13);
        assert!(report.zero_defect <= 1e-15);
    }

    #[test]
    fn fractional_tail_touches_zero_at_unit_frequency() {
        let grid = Grid::new(1, 4.0 * PI, 256).unwrap();
        let symbol = DiffusionSymbol::fractional_laplacian(1.0).unwrap();
        let report = symbol.validate_assumptions(&grid, 1.0, 1e-9).unwrap();
        assert!(report.pass);
        assert!(report.tail_sup.abs() <= 1e-13, "tail sup {}", report.tail_sup);
    }

    #[test]
    fn symmetric_jump_pair_fails_the_tail_assumption() {
        // J = (delta_{-1} + delta_{+1}) / 2 has symbol cos(xi), which climbs
        // back to 1 at 2 pi. Mass and expansion checks pass; the tail fails.
        let grid = Grid::new(1, 16.0, 512).unwrap();
        let dx = grid.dx();
        let mut field = Field::zeros(grid);
        let n = grid.points();
        let offset = (1.0 / dx) as usize;
        field.values[IxDyn(&[n / 2 + offset])] = 0.5 / dx;
        field.values[IxDyn(&[n / 2 - offset])] = 0.5 / dx;
        field.symmetry = Symmetry::EvenInXn;
        let symbol = DiffusionSymbol::convolution(field, 0.5, 2.0).unwrap();
        assert_abs_diff_eq!(symbol.eval(&[PI]).unwrap(), -1.0, epsilon = 1e-12);
        let report = symbol.validate_assumptions(&grid, 0.5, 1e-6).unwrap();
        assert!(report.mass_ok);
        assert!(report.expansion_ok, "residual {}", report.fit.max_rel_residual);
        assert!(!report.tail_ok, "tail sup {}", report.tail_sup);
        assert!(!report.pass);
        assert!(report.tail_sup > 1.0 - 1e-6);
    }

    #[test]
    fn convolution_constructor_validates_samples() {
        let grid = Grid::new(1, 8.0, 64).unwrap();
        // Not unit mass.
        let mut field = Field::gaussian(grid, 1.0).unwrap();
        field.values.mapv_inplace(|v| 2.0 * v);
        assert!(DiffusionSymbol::convolution(field, 0.5, 2.0).is_err());
        // Odd data is not an admissible kernel.
        let odd = crate::fields::odd_extend(&HalfField::bump(grid, 1.0));
        assert!(DiffusionSymbol::convolution(odd, 0.5, 2.0).is_err());
        // Negative values rejected.
        let mut neg = Field::gaussian(grid, 1.0).unwrap();
        neg.values[IxDyn(&[3])] = -0.1;
        assert!(DiffusionSymbol::convolution(neg, 0.5, 2.0).is_err());
    }
}
