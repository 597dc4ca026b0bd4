//! Built-in identity suite over small groups.
//!
//! The transform under test is passed in as a [`Kernels`] pair so that a
//! corrupted implementation can be checked against the same suite.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::apcount::{
    complement_identity_holds, complement_lambda3, lambda3_direct, t3_by_cosets, t3_count, t3_count_by_cosets, t3_raw,
};
use crate::error::Result;
use crate::fourier::{self, lambda3_from_spectrum, Spectrum};
use crate::gfspace::{DensityFunction, GroupParams, PointSet};
use crate::improve::{construct_g, ImprovePipelineConfig};
use crate::subspace::{average_over_cosets, Subspace};

/// The literal character sum `Σ_m f(m) ω^{a·m}`, O(p^{2n}).
pub fn naive_character_sum(f: &DensityFunction) -> Spectrum {
    let params = f.params();
    let p = params.p() as f64;
    let coeffs = (0..params.size())
        .map(|a| {
            (0..params.size())
                .map(|m| {
                    let phase = 2.0 * PI * params.dot(a, m) as f64 / p;
                    Complex64::from_polar(f.get(m), phase)
                })
                .sum()
        })
        .collect();
    Spectrum::new(params, coeffs).expect("p^n coefficients")
}

/// Forward and inverse transforms used by the suite.
#[derive(Clone, Copy)]
pub struct Kernels {
    pub forward: fn(&DensityFunction) -> Spectrum,
    pub inverse: fn(&Spectrum) -> Result<DensityFunction>,
}

impl Default for Kernels {
    fn default() -> Self {
        Kernels {
            forward: fourier::dft_forward,
            inverse: fourier::dft_inverse,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Worst observed error or a short failure note.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

const GROUPS: [(u32, u32); 6] = [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (5, 3)];
const SAMPLES: usize = 4;
const SEED: u64 = 0x5e1f_c4ec;

fn max_coeff_diff(a: &Spectrum, b: &Spectrum) -> f64 {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn random_subspace(params: GroupParams, rng: &mut ChaCha8Rng) -> Subspace {
    let k = rng.gen_range(0..=params.n() as usize);
    let gens: Vec<usize> = (0..k).map(|_| rng.gen_range(0..params.size())).collect();
    Subspace::span_indices(params, &gens).expect("indices in range")
}

struct Tally {
    name: &'static str,
    worst: f64,
    tol: f64,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Tally {
            name,
            worst: 0.0,
            tol,
            failure: None,
        }
    }

    fn observe(&mut self, err: f64, context: impl FnOnce() -> String) {
        if (err.is_nan() || err > self.tol) && self.failure.is_none() {
            self.failure = Some(format!("{} (error {err:e})", context()));
        }
        if !err.is_nan() {
            self.worst = self.worst.max(err);
        }
    }

    fn fail(&mut self, message: String) {
        if self.failure.is_none() {
            self.failure = Some(message);
        }
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.to_string(),
            passed: self.failure.is_none(),
            detail: self
                .failure
                .unwrap_or_else(|| format!("max error {:e} (tol {:e})", self.worst, self.tol)),
        }
    }
}

pub fn run() -> SelfCheckReport {
    run_with(Kernels::default())
}

pub fn run_with(kernels: Kernels) -> SelfCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut naive = Tally::new("transform_matches_character_sum", 1e-9);
    let mut round_trip = Tally::new("inverse_round_trip", 1e-10);
    let mut parseval = Tally::new("parseval", 1e-9);
    let mut spectral = Tally::new("spectral_lambda3_matches_direct", 1e-9);
    let mut complement = Tally::new("complementation_identity", 1e-9);
    let mut support = Tally::new("coset_average_spectrum_support", 1e-9);
    let mut cosets = Tally::new("coset_decomposition_of_counts", 1e-9);

    for &(p, n) in &GROUPS {
        let params = GroupParams::new(p, n).expect("built-in groups are valid");
        for _ in 0..SAMPLES {
            let f = DensityFunction::from_fn(params, |_| rng.gen::<f64>()).expect("values in [0,1)");
            let ctx = || format!("F_{p}^{n}");
            let spec = (kernels.forward)(&f);

            naive.observe(max_coeff_diff(&spec, &naive_character_sum(&f)), ctx);

            match (kernels.inverse)(&spec) {
                Ok(back) => round_trip.observe(back.max_abs_diff(&f).unwrap_or(f64::NAN), ctx),
                Err(e) => round_trip.fail(format!("F_{p}^{n}: {e}")),
            }

            let direct: f64 = f.values().iter().map(|v| v * v).sum();
            parseval.observe((spec.parseval_sum() - direct).abs() / direct.max(1.0), ctx);

            let via_spectrum = lambda3_from_spectrum(&spec);
            let lam = lambda3_direct(&f);
            spectral.observe((via_spectrum.re - lam).abs().max(via_spectrum.im.abs()), ctx);

            let (a, b, beta) = complement_lambda3(&f);
            complement.observe((a + b - (1.0 - 3.0 * beta + 3.0 * beta * beta)).abs(), ctx);
            let mask: Vec<bool> = (0..params.size()).map(|_| rng.gen_bool(0.5)).collect();
            let set = PointSet::from_mask(params, &mask).expect("mask length");
            if !complement_identity_holds(&set) {
                complement.fail(format!("F_{p}^{n}: exact identity failed for an indicator"));
            }

            let w = random_subspace(params, &mut rng);
            let fw = average_over_cosets(&f, &w).expect("same params");
            let fw_spec = (kernels.forward)(&fw);
            let perp = w.orthogonal_complement();
            let worst = (0..params.size())
                .map(|a| {
                    let expect = if perp.contains(a) {
                        spec.get(a)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    (fw_spec.get(a) - expect).norm()
                })
                .fold(0.0, f64::max);
            support.observe(worst, ctx);

            let scale = (params.size() as f64).powi(2);
            cosets.observe((t3_by_cosets(&f, &w) - t3_raw(&f)).abs() / scale, ctx);
            if t3_count_by_cosets(&set, &w) != t3_count(&set) {
                cosets.fail(format!("F_{p}^{n}: integer coset decomposition mismatch"));
            }
        }
    }

    let mut checks: Vec<CheckOutcome> = [naive, round_trip, parseval, spectral, complement, support, cosets]
        .into_iter()
        .map(Tally::finish)
        .collect();
    checks.push(closed_forms());
    checks.push(worked_example());
    SelfCheckReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// `T₃(S) = |S|²` and `T₃(W \ S) = (2β² - β)|W|²` for every `W ≤ F_3³`.
fn closed_forms() -> CheckOutcome {
    let params = GroupParams::new(3, 3).expect("valid");
    let mut failures = Vec::new();
    let mut cases = 0;
    for dim in 1..=3 {
        for w in Subspace::enumerate_dim(params, dim) {
            for ell in 1..=dim {
                let s = w.canonical_codim_subspace(ell).expect("ell ≤ dim");
                let s_set = PointSet::new(params, s.elements()).expect("in range");
                let t_set = PointSet::new(params, w.elements().into_iter().filter(|&x| !s.contains(x)).collect())
                    .expect("in range");
                let (wn, sn, tn) = (w.size() as u64, s.size() as u64, t_set.len() as u64);
                // (1-β)²|W|² = |S|², (2β²-β)|W|² = 2|T|² - |T||W|.
                if t3_count(&s_set) != sn * sn || t3_count(&t_set) != 2 * tn * tn - tn * wn {
                    failures.push(format!("{w}, ell {ell}"));
                }
                cases += 1;
            }
        }
    }
    CheckOutcome {
        name: "subspace_closed_forms".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{cases} (W, ell) cases exact")
        } else {
            format!("failed: {}", failures.join(" | "))
        },
    }
}

fn worked_example() -> CheckOutcome {
    let params = GroupParams::new(3, 2).expect("valid");
    let f = DensityFunction::constant(params, 0.5).expect("valid");
    let outcome = construct_g(&f, &ImprovePipelineConfig::new(1.0)).map(|(_, report)| {
        let err = (report.lambda3_g - 63.0 / 512.0).abs();
        (report.all_passed() && err < 1e-12, err)
    });
    let (passed, detail) = match outcome {
        Ok((ok, err)) => (ok, format!("|Λ₃(g) - 63/512| = {err:e}")),
        Err(e) => (false, e.to_string()),
    };
    CheckOutcome {
        name: "improve_worked_example".into(),
        passed,
        detail,
    }
}
