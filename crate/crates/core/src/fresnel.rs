//! Modified discrete Fresnel transform (baseband, real-valued).
//!
//! The transform matrix `Phi` is the real circulant matrix whose Fourier
//! eigenvalues are the quadratic-phase sequence
//!
//! ```text
//! G[k] = exp(-j*pi*k^2 / 2N)   for k <= N
//! G[k] = exp(+j*pi*k^2 / 2N)   for k >  N
//! ```
//!
//! so that `F Phi F^H = diag(G)` with `F` the unitary DFT of size `2N`.
//! The upper branch makes `G` Hermitian-symmetric, which is what makes `Phi`
//! real. At `k = N` the value `exp(-j*pi*N/2)` is real only when `N` is even,
//! so sizes with an odd half-size are rejected.
//!
//! Forward and inverse transforms go through the Fourier diagonalization in
//! `O(2N log 2N)`. [`FresnelBasis::dense_matrix`] synthesizes `Phi` entry by
//! entry and is kept as a slow reference path for property tests.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::Fft;

use crate::error::{Error, Result};
use crate::spectrum::{forward_plan, inverse_plan, norm};

/// Largest tolerated imaginary residue, relative to the output norm.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Real samples in the discrete-time domain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSequence(pub Vec<f64>);

/// Real coefficients in the discrete-Fresnel domain (one per subchirp).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FresnelSequence(pub Vec<f64>);

macro_rules! seq_impls {
    ($t:ident) => {
        impl $t {
            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn impulse(len: usize, at: usize) -> Self {
                let mut v = vec![0.0; len];
                v[at] = 1.0;
                Self(v)
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $t {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $t {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }
    };
}

seq_impls!(TimeSequence);
seq_impls!(FresnelSequence);

/// Size-`2N` modified DFnT: eigenvalues plus cached FFT plans.
///
/// Immutable after construction; cloning shares the plans.
#[derive(Clone)]
pub struct FresnelBasis {
    size: usize,
    eigenvalues: Arc<[Complex64]>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FresnelBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FresnelBasis")
            .field("size", &self.size)
            .finish_non_exhaustive()
    }
}

/// Eigenvalue `k` of the size-`two_n` modified DFnT.
fn eigenvalue(k: usize, two_n: usize) -> Complex64 {
    let half = two_n / 2;
    // k^2 mod 4N keeps the phase argument small without changing its value.
    let k2 = ((k * k) % (2 * two_n)) as f64;
    let phase = PI * k2 / two_n as f64;
    if k <= half {
        Complex64::from_polar(1.0, -phase)
    } else {
        Complex64::from_polar(1.0, phase)
    }
}

impl FresnelBasis {
    /// Builds the basis for frame size `two_n` (must be even, `>= 4`, with
    /// an even half-size).
    pub fn new(two_n: usize) -> Result<Self> {
        if two_n < 4 || !two_n.is_multiple_of(2) || !(two_n / 2).is_multiple_of(2) {
            return Err(Error::InvalidFrameSize(two_n));
        }
        let eigenvalues: Arc<[Complex64]> = (0..two_n).map(|k| eigenvalue(k, two_n)).collect();
        Ok(Self {
            size: two_n,
            eigenvalues,
            forward: forward_plan(two_n),
            inverse: inverse_plan(two_n),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn half_size(&self) -> usize {
        self.size / 2
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.size {
            return Err(Error::LengthMismatch {
                expected: self.size,
                actual: len,
            });
        }
        Ok(())
    }

    /// `F^H diag(g) F x` where `g` is either the eigenvalues or their
    /// conjugates. The imaginary residue is checked before truncation.
    fn diagonal_apply(&self, x: &[f64], conjugate: bool) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (b, g) in buf.iter_mut().zip(self.eigenvalues.iter()) {
            *b *= if conjugate { g.conj() } else { *g };
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        let mut residue = 0.0_f64;
        let out: Vec<f64> = buf
            .iter()
            .map(|v| {
                residue = residue.max(v.im.abs());
                v.re * scale
            })
            .collect();
        residue *= scale;
        let out_norm = norm(&out);
        if residue > IMAG_RESIDUE_TOL * out_norm {
            return Err(Error::ImaginaryResidue {
                ratio: residue / out_norm,
            });
        }
        Ok(out)
    }

    /// Forward transform `Phi x` (time domain to Fresnel domain).
    pub fn forward(&self, x: &TimeSequence) -> Result<FresnelSequence> {
        self.diagonal_apply(x, false).map(FresnelSequence)
    }

    /// Inverse transform `Phi^H xdot` (Fresnel domain to time domain).
    pub fn inverse(&self, xdot: &FresnelSequence) -> Result<TimeSequence> {
        self.diagonal_apply(xdot, true).map(TimeSequence)
    }

    /// Forward transform on a raw slice.
    pub fn forward_slice(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.diagonal_apply(x, false)
    }

    /// Inverse transform on a raw slice.
    pub fn inverse_slice(&self, xdot: &[f64]) -> Result<Vec<f64>> {
        self.diagonal_apply(xdot, true)
    }

    /// Dense `Phi` synthesized entry by entry from the eigenvalues
    /// (`O(size^2)` per column, no FFT). Row-major, `matrix[r][c]`.
    ///
    /// Slow reference path; the returned matrix holds the real parts and
    /// [`Self::dense_max_imag`] reports what was discarded.
    pub fn dense_matrix(&self) -> Vec<Vec<f64>> {
        let first = self.dense_first_column();
        let n = self.size;
        (0..n)
            .map(|r| (0..n).map(|c| first[(r + n - c) % n].re).collect())
            .collect()
    }

    /// Largest imaginary part among the dense entries of `Phi`.
    pub fn dense_max_imag(&self) -> f64 {
        self.dense_first_column()
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.im.abs()))
    }

    /// `phi[m] = (1/2N) sum_k G[k] exp(+j 2 pi k m / 2N)`; `Phi[r][c] = phi[r - c]`.
    fn dense_first_column(&self) -> Vec<Complex64> {
        let n = self.size;
        (0..n)
            .map(|m| {
                let sum: Complex64 = self
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(k, g)| {
                        let arg = 2.0 * PI * ((k * m) % n) as f64 / n as f64;
                        g * Complex64::from_polar(1.0, arg)
                    })
                    .sum();
                sum / n as f64
            })
            .collect()
    }
}

/// Builds the modified DFnT basis of size `two_n`.
pub fn build_fresnel_basis(two_n: usize) -> Result<FresnelBasis> {
    FresnelBasis::new(two_n)
}

pub fn dfnt_forward(basis: &FresnelBasis, x: &TimeSequence) -> Result<FresnelSequence> {
    basis.forward(x)
}

pub fn dfnt_inverse(basis: &FresnelBasis, xdot: &FresnelSequence) -> Result<TimeSequence> {
    basis.inverse(xdot)
}
