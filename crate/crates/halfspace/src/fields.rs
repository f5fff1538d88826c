//! Lattice fields on the periodic box `[-L, L)^N` and their half-space
//! restrictions.
//!
//! The Dirichlet problem on the half-space `x_N > 0` is represented through
//! odd reflection in the last coordinate: half-space data lives on the
//! sublattice `x_N = dx, ..., L - dx`, and [`odd_extend`] produces the full
//! periodic field with `u(x', -x_N) = -u(x', x_N)` holding bitwise. The zero
//! trace on `x_N = 0` is then a property of the representation, not a
//! boundary condition that has to be imposed row by row.
//!
//! Symmetry certificates ([`Symmetry`]) travel with a field. Operations that
//! provably preserve a symmetry propagate the flag instead of re-deciding it.

use crate::error::{Error, Result};
use crate::fft;
use ndarray::{ArrayD, Axis, Dimension, IxDyn};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Compensated (Kahan) summation. Lattice functionals compared at 1e-10
/// tolerances should not depend on accumulation order noise.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for x in values {
        let y = x - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// Odd under reflection of the last coordinate; zero on `x_N = 0`.
    OddInXn,
    /// Even under reflection of the last coordinate.
    EvenInXn,
}

/// Uniform cubic lattice on `[-L, L)^N` with `n` points per axis.
///
/// `n` must be a power of two; the origin sits at index `n/2` on every axis,
/// and the frequency lattice is `xi_k = pi k / L` in standard DFT order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Grid> {
        if dim == 0 || dim > 4 {
            return Err(Error::Config(format!("dimension {dim} out of range 1..=4")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!("half_width {half_width} must be positive")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis {points} must be a power of two >= 8"
            )));
        }
        let cells = (points as f64).powi(dim as i32);
        if cells > (1u64 << 27) as f64 {
            return Err(Error::Config(format!(
                "grid of {points}^{dim} points exceeds the supported size"
            )));
        }
        Ok(Grid { dim, half_width, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Frequency lattice spacing, `pi / L`.
    pub fn delta_xi(&self) -> f64 {
        PI / self.half_width
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    /// Coordinate of lattice index `j` along any axis: `-L + j dx`.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    /// Frequency of DFT bin `j`: `pi k / L` with the signed index
    /// `k = j` for `j < n/2` and `k = j - n` otherwise.
    pub fn freq(&self, j: usize) -> f64 {
        let k = if j < self.points / 2 {
            j as i64
        } else {
            j as i64 - self.points as i64
        };
        PI * k as f64 / self.half_width
    }

    /// Euclidean norm of the frequency vector at a multi-index.
    pub fn freq_norm(&self, ix: &[usize]) -> f64 {
        ix.iter().map(|&j| self.freq(j).powi(2)).sum::<f64>().sqrt()
    }

    /// Euclidean norm of the spatial coordinate at a multi-index.
    pub fn coord_norm(&self, ix: &[usize]) -> f64 {
        ix.iter().map(|&j| self.coord(j).powi(2)).sum::<f64>().sqrt()
    }

    /// Largest frequency magnitude on the lattice (Nyquist), `pi / dx`.
    pub fn nyquist(&self) -> f64 {
        PI / self.dx()
    }

    fn as_dyn(&self) -> IxDyn {
        IxDyn(&self.shape())
    }
}

/// Real scalar field sampled on the full periodic lattice.
#[derive(Clone, Debug)]
pub struct Field {
    pub grid: Grid,
    pub values: ArrayD<f64>,
    pub symmetry: Symmetry,
}

/// Real scalar field on the half-space sublattice `x_N = dx ... L - dx`.
/// The last axis has `n/2 - 1` entries; the remaining axes span the full box.
#[derive(Clone, Debug)]
pub struct HalfField {
    pub grid: Grid,
    pub values: ArrayD<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Field {
        Field { grid, values: ArrayD::zeros(grid.as_dyn()), symmetry: Symmetry::None }
    }

    /// Build a field from a function of the lattice coordinates. A claimed
    /// symmetry is verified on the constructed samples.
    pub fn from_fn(
        grid: Grid,
        f: impl Fn(&[f64]) -> f64,
        symmetry: Symmetry,
    ) -> Result<Field> {
        let values = ArrayD::from_shape_fn(grid.as_dyn(), |ix| {
            let mut point = vec![0.0; grid.dim()];
            for (p, &j) in point.iter_mut().zip(ix.slice()) {
                *p = grid.coord(j);
            }
            f(&point)
        });
        let field = Field { grid, values, symmetry };
        if symmetry != Symmetry::None {
            let scale = 1.0 + field.sup_norm();
            let defect = match symmetry {
                Symmetry::OddInXn => odd_defect(&field.values),
                Symmetry::EvenInXn => even_defect(&field.values),
                Symmetry::None => 0.0,
            };
            if defect > 1e-12 * scale {
                return Err(Error::Config(format!(
                    "claimed symmetry {symmetry:?} violated by the samples (defect {defect:.3e})"
                )));
            }
        }
        Ok(field)
    }

    /// Isotropic Gaussian with standard deviation `sigma`, normalized to unit
    /// discrete mass so it is admissible as a jump kernel sample. Even in
    /// every axis by the exact antisymmetry of the lattice coordinates.
    pub fn gaussian(grid: Grid, sigma: f64) -> Result<Field> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!("gaussian width {sigma} must be positive")));
        }
        let mut field = Field::from_fn(
            grid,
            |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                (-r2 / (2.0 * sigma * sigma)).exp()
            },
            Symmetry::EvenInXn,
        )?;
        let mass = grid.cell_volume() * kahan_sum(field.values.iter().copied());
        field.values.mapv_inplace(|v| v / mass);
        Ok(field)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Discrete mass `dx^N sum u`.
    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * kahan_sum(self.values.iter().copied())
    }

    /// Multilinear interpolation at an arbitrary point of the box.
    /// Errors when a coordinate leaves `[-L, L)`.
    pub fn sample_linear(&self, point: &[f64]) -> Result<f64> {
        let grid = &self.grid;
        if point.len() != grid.dim() {
            return Err(Error::Config(format!(
                "point dimension {} does not match grid dimension {}",
                point.len(),
                grid.dim()
            )));
        }
        let n = grid.points();
        let dx = grid.dx();
        let mut base = vec![0usize; grid.dim()];
        let mut frac = vec![0.0f64; grid.dim()];
        for (i, &x) in point.iter().enumerate() {
            if !(x >= -grid.half_width() && x < grid.half_width()) {
                return Err(Error::Numerics(format!(
                    "point coordinate {x} outside the truncation box [-{L}, {L})",
                    L = grid.half_width()
                )));
            }
            let s = (x + grid.half_width()) / dx;
            let j = s.floor() as usize;
            let j = j.min(n - 1);
            base[i] = j;
            frac[i] = (s - j as f64).clamp(0.0, 1.0);
        }
        // Sum over the 2^N corners of the enclosing cell, wrapping at the
        // periodic edge.
        let mut acc = 0.0;
        let corners = 1usize << grid.dim();
        let mut ix = vec![0usize; grid.dim()];
        for corner in 0..corners {
            let mut weight = 1.0;
            for i in 0..grid.dim() {
                let hi = (corner >> i) & 1 == 1;
                ix[i] = if hi { (base[i] + 1) % n } else { base[i] };
                weight *= if hi { frac[i] } else { 1.0 - frac[i] };
            }
            if weight != 0.0 {
                acc += weight * self.values[IxDyn(&ix)];
            }
        }
        Ok(acc)
    }

    /// Semidiscrete Fourier transform at an arbitrary frequency:
    /// `dx^N sum exp(-i x.xi) f(x)`. Exact for lattice frequencies, and the
    /// honest evaluation between them.
    pub fn transform_at(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.grid.dim() {
            return Err(Error::Config(format!(
                "frequency dimension {} does not match grid dimension {}",
                xi.len(),
                self.grid.dim()
            )));
        }
        let mut re = KahanState::new();
        let mut im = KahanState::new();
        for (ix, &v) in self.values.indexed_iter() {
            if v == 0.0 {
                continue;
            }
            let mut phase = 0.0f64;
            for (i, &j) in ix.slice().iter().enumerate() {
                phase += self.grid.coord(j) * xi[i];
            }
            re.add(v * phase.cos());
            im.add(-v * phase.sin());
        }
        Ok(self.grid.cell_volume() * Complex64::new(re.value(), im.value()))
    }
}

struct KahanState {
    sum: f64,
    carry: f64,
}

impl KahanState {
    fn new() -> Self {
        KahanState { sum: 0.0, carry: 0.0 }
    }
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
    fn value(&self) -> f64 {
        self.sum
    }
}

impl HalfField {
    pub fn half_shape(grid: &Grid) -> Vec<usize> {
        let mut shape = vec![grid.points(); grid.dim()];
        shape[grid.dim() - 1] = grid.points() / 2 - 1;
        shape
    }

    pub fn zeros(grid: Grid) -> HalfField {
        HalfField { grid, values: ArrayD::zeros(IxDyn(&Self::half_shape(&grid))) }
    }

    /// Build half-space data from a function of the coordinates; the last
    /// coordinate ranges over `dx ... L - dx`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> HalfField {
        let shape = Self::half_shape(&grid);
        let last = grid.dim() - 1;
        let values = ArrayD::from_shape_fn(IxDyn(&shape), |ix| {
            let mut point = vec![0.0; grid.dim()];
            for (i, &j) in ix.slice().iter().enumerate() {
                point[i] = if i == last {
                    (j as f64 + 1.0) * grid.dx()
                } else {
                    grid.coord(j)
                };
            }
            f(&point)
        });
        HalfField { grid, values }
    }

    /// The canonical compactly supported initial bump: a quartic cap of unit
    /// radius centered one unit above the boundary,
    /// `amplitude * max(0, 1 - |x - e_N|^2)^2`.
    pub fn bump(grid: Grid, amplitude: f64) -> HalfField {
        let dim = grid.dim();
        Self::from_fn(grid, |x| {
            let mut r2 = 0.0;
            for (i, &c) in x.iter().enumerate() {
                let d = if i == dim - 1 { c - 1.0 } else { c };
                r2 += d * d;
            }
            amplitude * (1.0 - r2).max(0.0).powi(2)
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Odd reflection of half-space data across `x_N = 0`.
///
/// The output satisfies `u(x', -x_N) = -u(x', x_N)` exactly (bitwise): values
/// are written in mirrored pairs and the fixed planes `x_N = 0` and
/// `x_N = -L` are zeroed. Carries the `OddInXn` certificate.
pub fn odd_extend(half: &HalfField) -> Field {
    let grid = half.grid;
    let n = grid.points();
    let last = Axis(grid.dim() - 1);
    let mut full = Field::zeros(grid);
    for (mut lane, src) in full.values.lanes_mut(last).into_iter().zip(half.values.lanes(last)) {
        for (j, &v) in src.iter().enumerate() {
            let upper = n / 2 + 1 + j;
            lane[upper] = v;
            lane[n - upper] = -v;
        }
        // lane[0] (x_N = -L) and lane[n/2] (x_N = 0) stay zero.
    }
    full.symmetry = Symmetry::OddInXn;
    full
}

/// Restriction of an odd field to the open half-space sublattice.
/// Inverse of [`odd_extend`]; requires the `OddInXn` certificate.
pub fn restrict_to_halfspace(field: &Field) -> Result<HalfField> {
    if field.symmetry != Symmetry::OddInXn {
        return Err(Error::Config(
            "restrict_to_halfspace expects a field carrying the OddInXn certificate".into(),
        ));
    }
    let grid = field.grid;
    let n = grid.points();
    let last = Axis(grid.dim() - 1);
    let mut half = HalfField::zeros(grid);
    for (mut dst, lane) in half.values.lanes_mut(last).into_iter().zip(field.values.lanes(last)) {
        for j in 0..n / 2 - 1 {
            dst[j] = lane[n / 2 + 1 + j];
        }
    }
    Ok(half)
}

/// Forward transform on the box: `dx^N`-scaled Riemann approximation of the
/// integral transform, bins on the standard frequency lattice.
pub fn forward_dft(field: &Field) -> ArrayD<Complex64> {
    fft::forward(&field.values, field.grid.dx())
}

/// Inverse transform back to a spatial field; keeps the real part. Physical
/// pipelines (real even multipliers applied to transforms of real fields)
/// return real data up to roundoff, which is the intended use.
pub fn inverse_dft(freq: &ArrayD<Complex64>, grid: &Grid) -> Result<Field> {
    if freq.shape() != grid.shape().as_slice() {
        return Err(Error::Config(format!(
            "frequency array shape {:?} does not match grid shape {:?}",
            freq.shape(),
            grid.shape()
        )));
    }
    Ok(Field {
        grid: *grid,
        values: fft::inverse_real(freq, grid.dx()),
        symmetry: Symmetry::None,
    })
}

/// First half-space moment `m1 = dx^N sum x_N u(x)` over `x_N > 0`.
pub fn moment_m1(half: &HalfField) -> f64 {
    let grid = half.grid;
    let dx = grid.dx();
    let last = grid.dim() - 1;
    grid.cell_volume()
        * kahan_sum(
            half.values
                .indexed_iter()
                .map(|(ix, &v)| (ix[last] as f64 + 1.0) * dx * v),
        )
}

/// Signed full-space moment `M1 = dx^N sum x_N u(x)` over the whole box.
/// Equals `2 m1` of the restriction for odd fields.
pub fn moment_m1_full(field: &Field) -> f64 {
    let grid = field.grid;
    let last = grid.dim() - 1;
    grid.cell_volume()
        * kahan_sum(
            field
                .values
                .indexed_iter()
                .map(|(ix, &v)| grid.coord(ix[last]) * v),
        )
}

/// `L1` norm of the forward transform on the frequency lattice,
/// `dxi^N sum |f_hat(xi_k)|`.
pub fn fourier_l1_norm(field: &Field) -> f64 {
    let freq = forward_dft(field);
    field.grid.delta_xi().powi(field.grid.dim() as i32)
        * kahan_sum(freq.iter().map(|c| c.norm()))
}

// Symmetry projections and defect measures. Reflection pairs the lattice
// indices j and n - j on the last axis; 0 and n/2 are the fixed planes.

pub(crate) fn odd_defect(values: &ArrayD<f64>) -> f64 {
    let ndim = values.ndim();
    let n = values.shape()[ndim - 1];
    let mut worst = 0.0f64;
    for lane in values.lanes(Axis(ndim - 1)) {
        worst = worst.max(lane[0].abs()).max(lane[n / 2].abs());
        for j in 1..n / 2 {
            worst = worst.max(0.5 * (lane[j] + lane[n - j]).abs());
        }
    }
    worst
}

pub(crate) fn even_defect(values: &ArrayD<f64>) -> f64 {
    let ndim = values.ndim();
    let n = values.shape()[ndim - 1];
    let mut worst = 0.0f64;
    for lane in values.lanes(Axis(ndim - 1)) {
        for j in 1..n / 2 {
            worst = worst.max(0.5 * (lane[j] - lane[n - j]).abs());
        }
    }
    worst
}

/// Largest absolute value on the Dirichlet plane `x_N = 0`.
pub(crate) fn trace_max(values: &ArrayD<f64>) -> f64 {
    let ndim = values.ndim();
    let n = values.shape()[ndim - 1];
    let mut worst = 0.0f64;
    for lane in values.lanes(Axis(ndim - 1)) {
        worst = worst.max(lane[n / 2].abs());
    }
    worst
}

/// Orthogonal projection onto the odd subspace. Removes roundoff asymmetry
/// after operations that preserve oddness exactly in exact arithmetic.
pub(crate) fn project_odd(values: &mut ArrayD<f64>) {
    let ndim = values.ndim();
    let n = values.shape()[ndim - 1];
    for mut lane in values.lanes_mut(Axis(ndim - 1)) {
        lane[0] = 0.0;
        lane[n / 2] = 0.0;
        for j in 1..n / 2 {
            let m = 0.5 * (lane[j] - lane[n - j]);
            lane[j] = m;
            lane[n - j] = -m;
        }
    }
}

pub(crate) fn project_even(values: &mut ArrayD<f64>) {
    let ndim = values.ndim();
    let n = values.shape()[ndim - 1];
    for mut lane in values.lanes_mut(Axis(ndim - 1)) {
        for j in 1..n / 2 {
            let m = 0.5 * (lane[j] + lane[n - j]);
            lane[j] = m;
            lane[n - j] = m;
        }
    }
}

#[derive(Clone, Debug)]
pub struct FourierProbeEntry {
    pub xi: Vec<f64>,
    pub measured: f64,
    pub expected: f64,
    /// `measured / expected`; NaN for probes with `xi_N = 0`.
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct FourierSmallXiReport {
    pub m1: f64,
    pub entries: Vec<FourierProbeEntry>,
    pub pass: bool,
}

/// Checks the small-frequency law for odd extensions: the transform magnitude
/// behaves as `|xi_N| (2 m1 + o(1))`, and vanishes when `xi_N = 0`.
///
/// Probes are evaluated by direct summation so arbitrary (off-lattice)
/// frequencies are allowed. The report passes when the smallest-magnitude
/// probe with `xi_N != 0` is within 5% of the law and every `xi_N = 0` probe
/// is at noise level.
pub fn verify_fourier_small_xi(field: &Field, probes: &[Vec<f64>]) -> Result<FourierSmallXiReport> {
    if field.symmetry != Symmetry::OddInXn {
        return Err(Error::Config(
            "small-frequency law applies to odd extensions; OddInXn certificate required".into(),
        ));
    }
    if probes.is_empty() {
        return Err(Error::Config("no probe frequencies supplied".into()));
    }
    let m1 = moment_m1(&restrict_to_halfspace(field)?);
    if m1 <= 0.0 {
        return Err(Error::Numerics(format!(
            "first moment m1 = {m1} is not positive; the law degenerates"
        )));
    }
    let last = field.grid.dim() - 1;
    let mut entries = Vec::with_capacity(probes.len());
    for xi in probes {
        let value = field.transform_at(xi)?.norm();
        let xi_n = xi[last].abs();
        let expected = 2.0 * m1 * xi_n;
        let ratio = if xi_n == 0.0 { f64::NAN } else { value / expected };
        entries.push(FourierProbeEntry { xi: xi.clone(), measured: value, expected, ratio });
    }
    // Judge the limit on the smallest |xi| probe that has a transverse part.
    let mut smallest: Option<(f64, f64)> = None;
    let mut zero_ok = true;
    for entry in &entries {
        let mag = entry.xi.iter().map(|c| c * c).sum::<f64>().sqrt();
        if entry.ratio.is_nan() {
            zero_ok &= entry.measured <= 1e-10 * 2.0 * m1;
        } else {
            match smallest {
                Some((best, _)) if best <= mag => {}
                _ => smallest = Some((mag, entry.ratio)),
            }
        }
    }
    let limit_ok = matches!(smallest, Some((_, r)) if (r - 1.0).abs() <= 0.05);
    Ok(FourierSmallXiReport { m1, entries, pass: limit_ok && zero_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid1(l: f64, n: usize) -> Grid {
        Grid::new(1, l, n).unwrap()
    }

    // Direct O(n^2) transform, written independently of the FFT path.
    fn oracle_forward_1d(field: &Field) -> Vec<Complex64> {
        let grid = field.grid;
        let n = grid.points();
        (0..n)
            .map(|k| {
                let xi = grid.freq(k);
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    let x = grid.coord(j);
                    let v = field.values[IxDyn(&[j])];
                    acc += v * Complex64::new(0.0, -x * xi).exp();
                }
                grid.dx() * acc
            })
            .collect()
    }

    #[test]
    fn forward_matches_direct_sum_oracle() {
        let grid = grid1(2.0, 8);
        let field = Field::from_fn(grid, |x| (1.3 * x[0]).sin() + 0.2 * x[0], Symmetry::None)
            .unwrap();
        let fast = forward_dft(&field);
        let slow = oracle_forward_1d(&field);
        for (k, s) in slow.iter().enumerate() {
            let f = fast[IxDyn(&[k])];
            assert!((f - s).norm() < 1e-12, "bin {k}: {f} vs {s}");
        }
    }

    #[test]
    fn odd_extension_is_bitwise_odd_and_round_trips() {
        let grid = grid1(8.0, 64);
        let half = HalfField::bump(grid, 1.5);
        let full = odd_extend(&half);
        assert_eq!(full.symmetry, Symmetry::OddInXn);
        assert_eq!(odd_defect(&full.values), 0.0);
        assert_eq!(trace_max(&full.values), 0.0);
        let back = restrict_to_halfspace(&full).unwrap();
        assert_eq!(back.values, half.values);
    }

    #[test]
    fn odd_extension_of_constant_is_signed_constant() {
        let grid = grid1(4.0, 16);
        let half = HalfField::from_fn(grid, |_| 2.5);
        let full = odd_extend(&half);
        let n = grid.points();
        for j in 0..n {
            let expected = if j == 0 || j == n / 2 {
                0.0
            } else if j > n / 2 {
                2.5
            } else {
                -2.5
            };
            assert_eq!(full.values[IxDyn(&[j])], expected);
        }
    }

    #[test]
    fn moment_doubling_under_odd_extension() {
        let grid = grid1(8.0, 128);
        let half = HalfField::bump(grid, 0.7);
        let m1 = moment_m1(&half);
        let full = odd_extend(&half);
        assert_abs_diff_eq!(moment_m1_full(&full), 2.0 * m1, epsilon = 1e-12 * (1.0 + m1.abs()));
    }

    #[test]
    fn moment_of_single_cell() {
        let grid = grid1(4.0, 32);
        let dx = grid.dx();
        let mut half = HalfField::zeros(grid);
        // Cell at x = 5 dx with height 3: m1 = 3 * 5 dx * dx.
        half.values[IxDyn(&[4])] = 3.0;
        assert_abs_diff_eq!(moment_m1(&half), 3.0 * 5.0 * dx * dx, epsilon = 1e-15);
    }

    #[test]
    fn even_field_has_zero_signed_moment() {
        let grid = grid1(6.0, 64);
        let field = Field::from_fn(grid, |x| (-x[0] * x[0]).exp(), Symmetry::EvenInXn).unwrap();
        let m = moment_m1_full(&field);
        assert!(m.abs() < 1e-12, "signed moment of even field: {m}");
    }

    #[test]
    fn half_bump_moment_matches_panel_quadrature() {
        // m1 of the unit bump: integral over [0,2] of x (1 - (x-1)^2)^2 dx = 16/15.
        let grid = grid1(8.0, 16384);
        let half = HalfField::bump(grid, 1.0);
        assert_abs_diff_eq!(moment_m1(&half), 16.0 / 15.0, epsilon = 1e-6);
    }

    #[test]
    fn forward_of_odd_field_is_purely_imaginary() {
        let grid = grid1(8.0, 64);
        let full = odd_extend(&HalfField::bump(grid, 1.0));
        let freq = forward_dft(&full);
        let scale = freq.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        for c in freq.iter() {
            assert!(c.re.abs() <= 1e-12 * (1.0 + scale));
        }
    }

    #[test]
    fn transform_at_matches_lattice_bins() {
        let grid = grid1(5.0, 32);
        let field =
            Field::from_fn(grid, |x| (-(x[0] * x[0])).exp() * (0.3 + x[0]), Symmetry::None)
                .unwrap();
        let freq = forward_dft(&field);
        for k in [0usize, 1, 5, 17, 31] {
            let direct = field.transform_at(&[grid.freq(k)]).unwrap();
            let fast = freq[IxDyn(&[k])];
            assert!((direct - fast).norm() < 1e-12);
        }
    }

    #[test]
    fn small_frequency_law_for_bump_extension() {
        let grid = grid1(16.0, 512);
        let full = odd_extend(&HalfField::bump(grid, 1.0));
        let report =
            verify_fourier_small_xi(&full, &[vec![0.5], vec![0.1], vec![0.01], vec![0.0]])
                .unwrap();
        assert!(report.pass, "report: {report:?}");
        // The finest probe sits within 2% of the law for this smooth bump.
        let fine = report.entries.iter().find(|e| e.xi[0] == 0.01).unwrap();
        assert!((fine.ratio - 1.0).abs() < 0.02, "ratio {}", fine.ratio);
        // Doubling the data doubles m1, leaving ratios unchanged.
        let mut doubled = full.clone();
        doubled.values.mapv_inplace(|v| 2.0 * v);
        let report2 = verify_fourier_small_xi(&doubled, &[vec![0.01]]).unwrap();
        let fine2 = report2.entries.first().unwrap();
        assert_abs_diff_eq!(fine2.ratio, fine.ratio, epsilon = 1e-12);
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let grid = grid1(4.0, 32);
        let field = Field::from_fn(grid, |x| 3.0 * x[0] + 1.0, Symmetry::None).unwrap();
        let dx = grid.dx();
        let x0 = grid.coord(7);
        assert_abs_diff_eq!(field.sample_linear(&[x0]).unwrap(), 3.0 * x0 + 1.0, epsilon = 1e-13);
        let mid = x0 + 0.37 * dx;
        assert_abs_diff_eq!(field.sample_linear(&[mid]).unwrap(), 3.0 * mid + 1.0, epsilon = 1e-12);
        assert!(field.sample_linear(&[grid.half_width()]).is_err());
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(Grid::new(0, 1.0, 16).is_err());
        assert!(Grid::new(1, -1.0, 16).is_err());
        assert!(Grid::new(1, 1.0, 48).is_err());
        assert!(Grid::new(1, 1.0, 4).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(seed in 0u64..1000) {
            use rand::{RngExt, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let grid = grid1(3.0, 32);
            let values = ArrayD::from_shape_fn(IxDyn(&[32]), |_| rng.random_range(-1.0..1.0));
            let field = Field { grid, values, symmetry: Symmetry::None };
            let freq = forward_dft(&field);
            let back = inverse_dft(&freq, &grid).unwrap();
            for (a, b) in field.values.iter().zip(back.values.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            // Parseval with this scaling: dx sum |f|^2 = (dxi/2pi) sum |fhat|^2.
            let lhs = grid.cell_volume() * kahan_sum(field.values.iter().map(|v| v * v));
            let rhs = grid.delta_xi() / (2.0 * PI)
                * kahan_sum(freq.iter().map(|c| c.norm_sqr()));
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.max(1e-300));
        }

        #[test]
        fn projection_enforces_oddness(seed in 0u64..200) {
            use rand::{RngExt, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut values = ArrayD::from_shape_fn(IxDyn(&[16]), |_| rng.random_range(-1.0..1.0));
            project_odd(&mut values);
            prop_assert_eq!(odd_defect(&values), 0.0);
        }
    }
}
