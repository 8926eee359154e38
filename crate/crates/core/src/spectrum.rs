//! Thin FFT helpers shared by the transform, the HS-OFDM baselines and the
//! noise synthesizer.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Unnormalized forward DFT of a real sequence.
pub fn fft_real(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT with `1/len` normalization, returned as complex samples.
pub fn ifft(spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    inverse_plan(buf.len()).process(&mut buf);
    let scale = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Splits a complex sequence into its real part and the largest absolute
/// imaginary component.
pub fn split_real(samples: &[Complex64]) -> (Vec<f64>, f64) {
    let residue = samples.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
    (samples.iter().map(|v| v.re).collect(), residue)
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    energy(x).sqrt()
}

/// Direct O(n^2) circular convolution of two equal-length sequences.
pub fn circular_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), b.len(), "circular convolution needs equal lengths");
    let n = a.len();
    (0..n)
        .map(|k| (0..n).map(|m| a[m] * b[(k + n - m) % n]).sum())
        .collect()
}
