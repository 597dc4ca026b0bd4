//! Construction of a function `g` with the same mean as `f` and a certified
//! smaller progression density.
//!
//! The pipeline: take the large spectrum `A` of `f`, let `V = span(A)` and
//! `W = V⊥`, average `f` over cosets of `W`, then on every coset where `f_W`
//! is bounded away from 0 and 1 move the mass off a codimension-ℓ subspace
//! `S ≤ W` onto `T = W \ S`, rescaling by `β⁻¹` with `β = 1 - p^{-ℓ}`.
//!
//! Every intermediate inequality of the argument is re-checked numerically
//! and recorded in the [`ImprovementReport`].

use serde::Serialize;

use crate::apcount::{coset_ap_triples, lambda3_direct, t3_between_cosets, t3_raw};
use crate::error::{Error, Result};
use crate::fourier::large_spectrum;
use crate::gfspace::{DensityFunction, GroupParams, PointSet};
use crate::subspace::{average_with, coset_values, CosetDecomposition, Subspace};

/// Absolute slack on per-triple comparisons.
pub const TRIPLE_TOL: f64 = 1e-9;
/// Relative slack on the aggregate decrease bound.
pub const AGGREGATE_TOL: f64 = 1e-6;
/// Slack on mean preservation.
pub const MEAN_TOL: f64 = 1e-12;
/// Slack on `Λ₃(f_W) ≤ Λ₃(f) + Δ`.
pub const TRUNCATION_TOL: f64 = 1e-9;
/// Tolerance for treating a function as constant on cosets.
pub const COSET_CONSTANT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImprovePipelineConfig {
    pub epsilon: f64,
    /// Placeholder for the unspecified density-threshold constant; only
    /// enters the default Δ.
    pub c_p: f64,
    pub delta_override: Option<f64>,
    pub ell_override: Option<usize>,
}

impl ImprovePipelineConfig {
    pub fn new(epsilon: f64) -> Self {
        ImprovePipelineConfig {
            epsilon,
            c_p: 1.0,
            delta_override: None,
            ell_override: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta_override = Some(delta);
        self
    }

    pub fn with_c_p(mut self, c_p: f64) -> Self {
        self.c_p = c_p;
        self
    }

    pub fn with_ell(mut self, ell: usize) -> Self {
        self.ell_override = Some(ell);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.c_p > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "c_p must be positive, got {}",
                self.c_p
            )));
        }
        if let Some(d) = self.delta_override {
            if !(d > 0.0) {
                return Err(Error::InvalidArgument(format!("delta must be positive, got {d}")));
            }
        }
        if self.ell_override == Some(0) {
            return Err(Error::InvalidArgument("ell must be at least 1".into()));
        }
        Ok(())
    }
}

/// `Δ = (ε⁶ / 2¹³p²) · exp(-16 ε⁻¹ c_p log p)`.
pub fn delta_from_epsilon(epsilon: f64, p: u32, c_p: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) || !(c_p > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need epsilon in (0, 1] and c_p > 0, got epsilon = {epsilon}, c_p = {c_p}"
        )));
    }
    let p = p as f64;
    Ok(epsilon.powi(6) / (8192.0 * p * p) * (-16.0 * c_p * p.ln() / epsilon).exp())
}

/// The unique `ℓ` with `4/ε ≤ p^ℓ < 4p/ε`.
pub fn choose_ell(epsilon: f64, p: u32) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    let target = 4.0 / epsilon;
    let mut ell = 0usize;
    let mut power = 1.0f64;
    while power < target {
        power *= p as f64;
        ell += 1;
    }
    Ok(ell)
}

/// `A`, `V = span(A)` and `W = V⊥` for one threshold.
#[derive(Debug, Clone)]
pub struct SpectralSubspaces {
    pub large_spectrum: PointSet,
    pub v: Subspace,
    pub w: Subspace,
    /// `dim(V ∩ W)`; nonzero when `V` contains self-orthogonal vectors.
    pub v_cap_w_dim: usize,
}

pub fn build_w(f: &DensityFunction, delta: f64) -> Result<SpectralSubspaces> {
    let a = large_spectrum(f, delta)?;
    let v = Subspace::span_indices(f.params(), a.members())?;
    let w = v.orthogonal_complement();
    let v_cap_w_dim = v.intersect(&w)?.dim();
    Ok(SpectralSubspaces {
        large_spectrum: a,
        v,
        w,
        v_cap_w_dim,
    })
}

fn in_v_prime(value: f64, epsilon: f64) -> bool {
    value >= epsilon / 4.0 && value <= 1.0 - epsilon / 4.0
}

/// Transversal representatives of the cosets with `f_W ∈ [ε/4, 1 - ε/4]`.
pub fn select_v_prime(fw: &DensityFunction, cosets: &CosetDecomposition, epsilon: f64) -> Result<Vec<usize>> {
    let values = coset_values(fw, cosets, COSET_CONSTANT_TOL)?;
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, &v)| in_v_prime(v, epsilon))
        .map(|(i, _)| cosets.transversal()[i])
        .collect())
}

/// One of the eight membership patterns of a coset-AP triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseCheck {
    /// Membership of `(u1, u2, u3)` in `V′`, e.g. `"in,out,in"`.
    pub class: String,
    pub triples: usize,
    /// `Σ T₃(g | ·)` over the class.
    pub lhs: f64,
    /// `Σ T₃(f_W | ·)`, scaled by `1 - ε²/16p²` for the all-in class.
    pub rhs: f64,
    /// Largest per-triple violation (negative when all pass with margin).
    pub max_excess: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateCheck {
    pub t3_g: f64,
    pub t3_fw: f64,
    /// Raw progression count among the `V′` representatives.
    pub t3_v_prime: u64,
    /// `(ε⁵/1024p²) |W|² T₃(V′)`.
    pub certified_drop: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementReport {
    pub p: u32,
    pub n: u32,
    pub epsilon: f64,
    pub c_p: f64,
    pub delta_used: f64,
    pub delta_overridden: bool,
    pub large_spectrum: Vec<usize>,
    pub v: Subspace,
    pub w: Subspace,
    pub v_cap_w_dim: usize,
    pub transversal_size: usize,
    pub v_prime: Vec<usize>,
    pub ell: usize,
    pub s: Subspace,
    pub beta: f64,
    pub mean_f: f64,
    pub mean_g: f64,
    pub lambda3_f: f64,
    pub lambda3_fw: f64,
    pub lambda3_g: f64,
    /// `E(|f - f_W|)` for the constructed `W`.
    pub mean_abs_deviation: f64,
    /// `E(|f - f_W|) > ε`, checked for the constructed `W` only.
    pub hypothesis_holds: bool,
    pub per_case_checks: Vec<CaseCheck>,
    pub aggregate_check: AggregateCheck,
    /// `Λ₃(f_W) ≤ Λ₃(f) + Δ`.
    pub truncation_check: bool,
    pub mean_check: bool,
    /// `2|V′| > ε · transversal_size`; present when the hypothesis holds.
    pub v_prime_lower_bound: Option<bool>,
    /// `Λ₃(g) < Λ₃(f) - Δ`; present when the hypothesis holds and the
    /// certified bound `Λ₃(f_W) - drop/p^{2n}` already lies below `Λ₃(f) - Δ`.
    pub conclusion_check: Option<bool>,
}

impl ImprovementReport {
    pub fn all_passed(&self) -> bool {
        self.per_case_checks.iter().all(|c| c.passed)
            && self.aggregate_check.passed
            && self.truncation_check
            && self.mean_check
            && self.v_prime_lower_bound != Some(false)
            && self.conclusion_check != Some(false)
    }
}

fn class_label(mask: usize) -> String {
    (0..3)
        .map(|b| if mask & (1 << b) != 0 { "in" } else { "out" })
        .collect::<Vec<_>>()
        .join(",")
}

/// Count of `(i1, i2)` with `i1, i2, 2u2 - u1` all in `V′`, under the
/// transversal's own addition.
fn count_rep_progressions(cosets: &CosetDecomposition, selected: &[bool]) -> u64 {
    coset_ap_triples(cosets)
        .into_iter()
        .filter(|&(a, b, c)| selected[a] && selected[b] && selected[c])
        .count() as u64
}

/// Builds `g` from `f` and audits every step.
pub fn construct_g(
    f: &DensityFunction,
    config: &ImprovePipelineConfig,
) -> Result<(DensityFunction, ImprovementReport)> {
    config.validate()?;
    let params: GroupParams = f.params();
    let p = params.p();
    let epsilon = config.epsilon;
    let delta = match config.delta_override {
        Some(d) => d,
        None => delta_from_epsilon(epsilon, p, config.c_p)?,
    };

    let spectral = build_w(f, delta)?;
    let w = spectral.w.clone();
    let cosets = CosetDecomposition::new(&w);
    let fw = average_with(f, &cosets)?;

    let ell = match config.ell_override {
        Some(l) => l,
        None => choose_ell(epsilon, p)?,
    };
    if ell > w.dim() {
        return Err(Error::InsufficientDimension { ell, dim: w.dim() });
    }
    let s = w.canonical_codim_subspace(ell)?;
    let beta = 1.0 - (p as f64).powi(-(ell as i32));

    let values = coset_values(&fw, &cosets, COSET_CONSTANT_TOL)?;
    let selected: Vec<bool> = values.iter().map(|&v| in_v_prime(v, epsilon)).collect();
    let v_prime: Vec<usize> = (0..values.len())
        .filter(|&i| selected[i])
        .map(|i| cosets.transversal()[i])
        .collect();

    let mut g_values = vec![0.0; params.size()];
    for (m, slot) in g_values.iter_mut().enumerate() {
        let pos = cosets.coset_of(m);
        *slot = if selected[pos] {
            let offset = params.sub(m, cosets.transversal()[pos]);
            if s.contains(offset) {
                0.0
            } else {
                values[pos] / beta
            }
        } else {
            fw.get(m)
        };
    }
    let g = DensityFunction::from_computed(params, g_values)?;

    let lambda3_f = lambda3_direct(f);
    let lambda3_fw = lambda3_direct(&fw);
    let lambda3_g = lambda3_direct(&g);

    // Per-triple comparison, aggregated by membership pattern.
    let members = cosets.cosets();
    let w_sq = (w.size() as f64).powi(2);
    let shrink = 1.0 - epsilon * epsilon / (16.0 * (p as f64).powi(2));
    let mut classes: Vec<CaseCheck> = (0..8)
        .map(|mask| CaseCheck {
            class: class_label(mask),
            triples: 0,
            lhs: 0.0,
            rhs: 0.0,
            max_excess: f64::NEG_INFINITY,
            passed: true,
        })
        .collect();
    for triple in coset_ap_triples(&cosets) {
        let (a, b, c) = triple;
        let mask = usize::from(selected[a]) | usize::from(selected[b]) << 1 | usize::from(selected[c]) << 2;
        let lhs = t3_between_cosets(&g, &cosets, &members, triple);
        let fw_term = values[a] * values[b] * values[c] * w_sq;
        let (rhs, excess) = if mask == 7 {
            let bound = fw_term * shrink;
            (bound, lhs - bound)
        } else {
            (fw_term, (lhs - fw_term).abs())
        };
        let entry = &mut classes[mask];
        entry.triples += 1;
        entry.lhs += lhs;
        entry.rhs += rhs;
        entry.max_excess = entry.max_excess.max(excess);
        entry.passed &= excess <= TRIPLE_TOL;
    }
    let per_case_checks: Vec<CaseCheck> = classes.into_iter().filter(|c| c.triples > 0).collect();

    let t3_g = t3_raw(&g);
    let t3_fw = t3_raw(&fw);
    let t3_v_prime = count_rep_progressions(&cosets, &selected);
    let certified_drop = epsilon.powi(5) / (1024.0 * (p as f64).powi(2)) * w_sq * t3_v_prime as f64;
    let aggregate_check = AggregateCheck {
        t3_g,
        t3_fw,
        t3_v_prime,
        certified_drop,
        passed: t3_g <= t3_fw - certified_drop + AGGREGATE_TOL * t3_fw.abs().max(1.0),
    };

    let mean_f = f.expectation();
    let mean_g = g.expectation();
    let mean_abs_deviation = f.mean_abs_diff(&fw)?;
    let hypothesis_holds = mean_abs_deviation > epsilon;
    let transversal_size = cosets.num_cosets();
    let v_prime_lower_bound =
        hypothesis_holds.then_some(2.0 * v_prime.len() as f64 > epsilon * transversal_size as f64);
    let certified_upper = lambda3_fw - certified_drop * params.pair_norm();
    let conclusion_check =
        (hypothesis_holds && certified_upper < lambda3_f - delta).then_some(lambda3_g < lambda3_f - delta);

    let report = ImprovementReport {
        p,
        n: params.n(),
        epsilon,
        c_p: config.c_p,
        delta_used: delta,
        delta_overridden: config.delta_override.is_some(),
        large_spectrum: spectral.large_spectrum.members().to_vec(),
        v: spectral.v,
        w,
        v_cap_w_dim: spectral.v_cap_w_dim,
        transversal_size,
        v_prime,
        ell,
        s,
        beta,
        mean_f,
        mean_g,
        lambda3_f,
        lambda3_fw,
        lambda3_g,
        mean_abs_deviation,
        hypothesis_holds,
        per_case_checks,
        aggregate_check,
        truncation_check: lambda3_fw <= lambda3_f + delta + TRUNCATION_TOL,
        mean_check: (mean_g - mean_f).abs() <= MEAN_TOL,
        v_prime_lower_bound,
        conclusion_check,
    };
    Ok((g, report))
}
