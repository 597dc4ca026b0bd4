//! Character transform on F_p^n.
//!
//! Convention: `f̂(a) = Σ_m f(m) ω^{a·m}` with `ω = exp(2πi/p)` and `a·m` the
//! standard dot product mod p. The inverse carries `p^{-n}` and `ω^{-a·m}`.
//! The transform runs as n passes of a p-point DFT, one per coordinate axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gfspace::{DensityFunction, GroupParams, PointSet};

/// Tolerance on the imaginary part left after inverting a real spectrum.
pub const INVERSE_IMAG_TOL: f64 = 1e-10;
/// Tolerance on the imaginary part of the spectral Λ₃ sum.
pub const LAMBDA_IMAG_TOL: f64 = 1e-9;

/// Fourier coefficients indexed by frequency in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    params: GroupParams,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(params: GroupParams, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                found: coeffs.len(),
            });
        }
        Ok(Spectrum { params, coeffs })
    }

    pub fn params(&self) -> GroupParams {
        self.params
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn get(&self, a: usize) -> Complex64 {
        self.coeffs[a]
    }

    /// `p^{-n} Σ_a |f̂(a)|²`, which equals `Σ_m |f(m)|²` by Parseval.
    pub fn parseval_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.params.size() as f64
    }

    /// Largest `|F(a) - conj(F(-a))|`; zero for spectra of real functions.
    pub fn conjugate_asymmetry(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|a| (self.coeffs[a] - self.coeffs[self.params.neg(a)].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Frequencies with `|F(a)| > delta·p^n`, strictly.
    pub fn large(&self, delta: f64) -> Result<PointSet> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "spectrum threshold must be positive, got {delta}"
            )));
        }
        let cutoff = delta * self.params.size() as f64;
        let members = (0..self.coeffs.len())
            .filter(|&a| self.coeffs[a].norm() > cutoff)
            .collect();
        PointSet::new(self.params, members)
    }

    /// `"index re im"` lines for `|F(a)| > cutoff`, by descending magnitude
    /// then ascending index.
    pub fn export_lines(&self, cutoff: f64) -> Vec<String> {
        let mut rows: Vec<(usize, f64)> = (0..self.coeffs.len())
            .map(|a| (a, self.coeffs[a].norm()))
            .filter(|&(_, mag)| mag > cutoff)
            .collect();
        rows.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        rows.into_iter()
            .map(|(a, _)| format!("{} {} {}", a, self.coeffs[a].re, self.coeffs[a].im))
            .collect()
    }
}

fn roots_of_unity(p: usize, sign: f64) -> Vec<Complex64> {
    (0..p)
        .map(|t| Complex64::from_polar(1.0, sign * 2.0 * PI * t as f64 / p as f64))
        .collect()
}

/// One p-point DFT along `axis`, applied to every line of `data`.
fn axis_pass(data: &mut [Complex64], params: GroupParams, axis: u32, roots: &[Complex64]) {
    let p = params.p() as usize;
    let stride = p.pow(axis);
    let lines = data.len() / p;
    let src: &[Complex64] = data;
    let transformed: Vec<Vec<Complex64>> = (0..lines)
        .into_par_iter()
        .map(|l| {
            let base = (l / stride) * stride * p + l % stride;
            (0..p)
                .map(|a| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..p {
                        acc += src[base + j * stride] * roots[(a * j) % p];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    for (l, line) in transformed.into_iter().enumerate() {
        let base = (l / stride) * stride * p + l % stride;
        for (a, v) in line.into_iter().enumerate() {
            data[base + a * stride] = v;
        }
    }
}

fn transform(params: GroupParams, mut data: Vec<Complex64>, sign: f64) -> Vec<Complex64> {
    let roots = roots_of_unity(params.p() as usize, sign);
    for axis in 0..params.n() {
        axis_pass(&mut data, params, axis, &roots);
    }
    data
}

pub fn dft_forward(f: &DensityFunction) -> Spectrum {
    let data = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Spectrum {
        params: f.params(),
        coeffs: transform(f.params(), data, 1.0),
    }
}

/// Inverse transform without any reality or range checks.
pub fn dft_inverse_complex(spectrum: &Spectrum) -> Vec<Complex64> {
    let scale = 1.0 / spectrum.params.size() as f64;
    transform(spectrum.params, spectrum.coeffs.clone(), -1.0)
        .into_iter()
        .map(|c| c * scale)
        .collect()
}

/// Inverse transform back to a density function; fails when the preimage is
/// not real or leaves [0, 1].
pub fn dft_inverse(spectrum: &Spectrum) -> Result<DensityFunction> {
    let values = dft_inverse_complex(spectrum);
    let residue = values.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if residue > INVERSE_IMAG_TOL {
        return Err(Error::ImaginaryResidue {
            residue,
            tolerance: INVERSE_IMAG_TOL,
        });
    }
    DensityFunction::from_computed(spectrum.params, values.into_iter().map(|c| c.re).collect())
}

/// `p^{-3n} Σ_a F(a)² F(-2a)`, complex.
pub fn lambda3_from_spectrum(spectrum: &Spectrum) -> Complex64 {
    let params = spectrum.params;
    let minus_two = params.p() - 2;
    let sum: Complex64 = (0..spectrum.coeffs.len())
        .map(|a| {
            let c = spectrum.coeffs[a];
            c * c * spectrum.coeffs[params.scale(a, minus_two)]
        })
        .sum();
    let s = params.size() as f64;
    sum / (s * s * s)
}

pub fn lambda3_spectral(f: &DensityFunction) -> Result<f64> {
    let value = lambda3_from_spectrum(&dft_forward(f));
    if value.im.abs() > LAMBDA_IMAG_TOL {
        return Err(Error::ImaginaryResidue {
            residue: value.im.abs(),
            tolerance: LAMBDA_IMAG_TOL,
        });
    }
    Ok(value.re)
}

/// The large spectrum `{a : |f̂(a)| > delta·p^n}`; at most `delta⁻²` points.
pub fn large_spectrum(f: &DensityFunction, delta: f64) -> Result<PointSet> {
    let set = dft_forward(f).large(delta)?;
    if set.len() as f64 > 1.0 / (delta * delta) {
        return Err(Error::Consistency(format!(
            "large spectrum has {} points, above delta^-2 = {}",
            set.len(),
            1.0 / (delta * delta)
        )));
    }
    Ok(set)
}
