//! Scaled discrete Fourier transforms on the periodic box.
//!
//! The forward transform approximates the integral convention
//! `F(f)(xi) = integral of exp(-i x.xi) f(x) dx` by the lattice Riemann sum;
//! the inverse carries the `(2 pi)^-N` factor. With the box `[-L, L)^N`,
//! `n` points per axis and the frequency lattice `xi_k = pi k / L`, the
//! products `dx * n * dxi = 2 pi` hold exactly, so a round trip is the
//! identity up to floating-point roundoff.
//!
//! The origin sits at lattice index `n/2`, which shows up as a `(-1)^k`
//! phase per axis relative to the raw FFT bins. The phase is applied on the
//! frequency side in both directions.

use ndarray::{ArrayD, Axis, Dimension};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_axes(data: &mut ArrayD<Complex64>, inverse: bool) {
    for axis in 0..data.ndim() {
        let n = data.shape()[axis];
        let fft = PLANNER.with(|p| {
            let mut planner = p.borrow_mut();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        });
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for mut lane in data.lanes_mut(Axis(axis)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(buf.iter()) {
                *v = *b;
            }
        }
    }
}

// Multiply every element by scale * (-1)^(sum of indices). Index parity is
// taken on raw bin indices; signed frequency indices agree because n is even.
fn apply_centering(data: &mut ArrayD<Complex64>, scale: f64) {
    for (ix, v) in data.indexed_iter_mut() {
        let parity: usize = ix.slice().iter().sum();
        let s = if parity & 1 == 1 { -scale } else { scale };
        *v *= s;
    }
}

/// Forward transform of real samples: returns `dx^N (-1)^k DFT[f]` on the
/// standard-order frequency lattice.
pub fn forward(values: &ArrayD<f64>, dx: f64) -> ArrayD<Complex64> {
    let mut data = values.mapv(|v| Complex64::new(v, 0.0));
    transform_axes(&mut data, false);
    apply_centering(&mut data, dx.powi(values.ndim() as i32));
    data
}

/// Inverse transform back to the spatial lattice. The result of a physical
/// pipeline (real multiplier times a forward transform) is real up to
/// roundoff; the caller decides what to do with the imaginary residue.
pub fn inverse(freq: &ArrayD<Complex64>, dx: f64) -> ArrayD<Complex64> {
    let n = freq.shape()[0];
    let mut data = freq.clone();
    // (dxi / 2 pi)^N = (n dx)^-N per axis, folded into the centering pass.
    apply_centering(&mut data, 1.0 / (n as f64 * dx).powi(freq.ndim() as i32));
    transform_axes(&mut data, true);
    data
}

/// Inverse transform keeping only the real part.
pub fn inverse_real(freq: &ArrayD<Complex64>, dx: f64) -> ArrayD<f64> {
    inverse(freq, dx).mapv(|v| v.re)
}
