//! Three-term progression counts.
//!
//! Progressions are ordered pairs `(m, d)` with all of `m, m+d, m+2d` in the
//! relevant set. Raw counts (`T₃`) include the trivial `d = 0` progressions,
//! `T₃′` excludes them, and `Λ₃` is the raw count divided by `p^{2n}`.
//! Indicator inputs are counted in exact integer arithmetic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfspace::{DensityFunction, GroupParams, PointSet};
use crate::subspace::{CosetDecomposition, Subspace};

/// Outer-loop partition size for parallel sums; fixed so that float
/// accumulation order does not depend on the thread count.
const PARTITION: usize = 64;

/// `Λ₃(f) = p^{-2n} Σ_{m,d} f(m) f(m+d) f(m+2d)`.
pub fn lambda3_direct(f: &DensityFunction) -> f64 {
    t3_raw(f) * f.params().pair_norm()
}

/// The unnormalised triple sum `T₃(f)`.
pub fn t3_raw(f: &DensityFunction) -> f64 {
    let params = f.params();
    let size = params.size();
    let partials: Vec<f64> = (0..size.div_ceil(PARTITION))
        .into_par_iter()
        .map(|chunk| {
            let mut acc = 0.0;
            for m in chunk * PARTITION..((chunk + 1) * PARTITION).min(size) {
                let fm = f.get(m);
                if fm == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for d in 0..size {
                    inner += f.get(params.add(m, d)) * f.get(params.combine(m, 1, d, 2));
                }
                acc += fm * inner;
            }
            acc
        })
        .collect();
    partials.iter().sum()
}

/// Raw progression count of a set, trivial progressions included.
pub fn t3_count(set: &PointSet) -> u64 {
    let params = set.params();
    let mask = set.mask();
    let members = set.members();
    members
        .par_chunks(PARTITION)
        .map(|chunk| {
            let mut acc = 0u64;
            for &m in chunk {
                for &x in members {
                    // m, x = m + d, 2x - m = m + 2d
                    if mask[params.combine(x, 2, m, params.p() - 1)] {
                        acc += 1;
                    }
                }
            }
            acc
        })
        .sum()
}

/// Number of progressions with `d ≠ 0` inside `set`.
pub fn t3_nontrivial(set: &PointSet) -> u64 {
    t3_count(set) - set.len() as u64
}

/// `T₃(f | U, V, W)`: the sum over `m ∈ U, m+d ∈ V, m+2d ∈ W`.
pub fn t3_restricted(f: &DensityFunction, u: &PointSet, v: &PointSet, w: &PointSet) -> Result<f64> {
    let params = f.params();
    for s in [u, v, w] {
        if s.params() != params {
            return Err(Error::ParamsMismatch {
                left: (params.p(), params.n()),
                right: (s.params().p(), s.params().n()),
            });
        }
    }
    Ok(restricted_sum(f, u.members(), v.members(), &w.mask()))
}

fn restricted_sum(f: &DensityFunction, first: &[usize], second: &[usize], third: &[bool]) -> f64 {
    let params = f.params();
    let mut acc = 0.0;
    for &m in first {
        let fm = f.get(m);
        if fm == 0.0 {
            continue;
        }
        for &x in second {
            let z = params.combine(x, 2, m, params.p() - 1);
            if third[z] {
                acc += fm * f.get(x) * f.get(z);
            }
        }
    }
    acc
}

/// Summary of the triple counts of one function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleCount {
    /// `T₃(f)`, trivial progressions included.
    pub raw: f64,
    /// `Σ f(m)³`, the `d = 0` contribution.
    pub trivial: f64,
    /// `raw - trivial`; equals `T₃′` for indicators.
    pub nontrivial: f64,
    /// `raw / p^{2n}`.
    pub lambda3: f64,
    /// Exact integer counts when the input is 0/1-valued.
    pub exact: Option<ExactCount>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactCount {
    pub raw: u64,
    pub nontrivial: u64,
    pub size: u64,
    /// `p^{2n}`, the denominator of `Λ₃`.
    pub denominator: u64,
}

pub fn count(f: &DensityFunction) -> TripleCount {
    let params = f.params();
    let denominator = (params.size() as u64).pow(2);
    if let Some(set) = f.support() {
        let raw = t3_count(&set);
        let size = set.len() as u64;
        return TripleCount {
            raw: raw as f64,
            trivial: size as f64,
            nontrivial: (raw - size) as f64,
            lambda3: raw as f64 / denominator as f64,
            exact: Some(ExactCount {
                raw,
                nontrivial: raw - size,
                size,
                denominator,
            }),
        };
    }
    let raw = t3_raw(f);
    let trivial: f64 = f.values().iter().map(|v| v * v * v).sum();
    TripleCount {
        raw,
        trivial,
        nontrivial: raw - trivial,
        lambda3: raw * params.pair_norm(),
        exact: None,
    }
}

/// `(Λ₃(h₁), Λ₃(1 - h₁), E(h₁))`.
pub fn complement_lambda3(h1: &DensityFunction) -> (f64, f64, f64) {
    (lambda3_direct(h1), lambda3_direct(&h1.complement()), h1.expectation())
}

/// `(1 - 3β + 3β²) p^{2n}` in integers, with `β = |S| / p^n`.
pub fn complement_identity_rhs(params: GroupParams, set_size: usize) -> u64 {
    let n = params.size() as u64;
    let s = set_size as u64;
    n * n + 3 * s * s - 3 * s * n
}

/// Checks `T₃(S) + T₃(Sᶜ) = (1 - 3β + 3β²) p^{2n}` exactly.
pub fn complement_identity_holds(set: &PointSet) -> bool {
    t3_count(set) + t3_count(&set.complement()) == complement_identity_rhs(set.params(), set.len())
}

/// Coset-AP triples of a decomposition: transversal positions `(i1, i2, i3)`
/// with `u1 + u3 = 2 u2`, ordered by `(i1, i2)`.
pub fn coset_ap_triples(cosets: &CosetDecomposition) -> Vec<(usize, usize, usize)> {
    let p = cosets.params().p();
    let k = cosets.num_cosets();
    let mut out = Vec::with_capacity(k * k);
    for i1 in 0..k {
        for i2 in 0..k {
            out.push((i1, i2, cosets.rep_combine(i2, 2, i1, p - 1)));
        }
    }
    out
}

/// `T₃(h | u1 + W, u2 + W, u3 + W)` for transversal positions `triple`;
/// `members` is `cosets.cosets()`.
pub fn t3_between_cosets(
    h: &DensityFunction,
    cosets: &CosetDecomposition,
    members: &[Vec<usize>],
    triple: (usize, usize, usize),
) -> f64 {
    let params = h.params();
    let mut acc = 0.0;
    for &m in &members[triple.0] {
        let hm = h.get(m);
        if hm == 0.0 {
            continue;
        }
        for &x in &members[triple.1] {
            let z = params.combine(x, 2, m, params.p() - 1);
            if cosets.coset_of(z) == triple.2 {
                acc += hm * h.get(x) * h.get(z);
            }
        }
    }
    acc
}

/// `Σ` over coset-AP triples of the restricted counts; equals `T₃(h)`.
pub fn t3_by_cosets(h: &DensityFunction, w: &Subspace) -> f64 {
    let cosets = CosetDecomposition::new(w);
    let members = cosets.cosets();
    coset_ap_triples(&cosets)
        .into_iter()
        .map(|t| t3_between_cosets(h, &cosets, &members, t))
        .sum()
}

/// Integer form of [`t3_by_cosets`] for sets.
pub fn t3_count_by_cosets(set: &PointSet, w: &Subspace) -> u64 {
    let params = set.params();
    let mask = set.mask();
    let cosets = CosetDecomposition::new(w);
    let members: Vec<Vec<usize>> = cosets
        .cosets()
        .into_iter()
        .map(|c| c.into_iter().filter(|&m| mask[m]).collect())
        .collect();
    let mut total = 0u64;
    for (i1, i2, i3) in coset_ap_triples(&cosets) {
        for &m in &members[i1] {
            for &x in &members[i2] {
                let z = params.combine(x, 2, m, params.p() - 1);
                if mask[z] && cosets.coset_of(z) == i3 {
                    total += 1;
                }
            }
        }
    }
    total
}

/// How subgroups of the Varnavides family are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgroupSampling {
    /// Every subspace of the requested dimension, once.
    Exhaustive,
    /// Independent draws of ordered linearly independent tuples.
    Random { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarnavidesReport {
    pub m_dim: usize,
    pub exhaustive: bool,
    pub sampled_subgroups: usize,
    /// `|S| / p^n`.
    pub alpha: f64,
    /// Fraction of examined cosets `b + A` with `|(b+A) ∩ S| ≥ α|A|/2 > 0`.
    pub dense_coset_fraction: f64,
    /// `Σ_A Σ_b T₃′((b+A) ∩ S)` over the sampled subgroups.
    pub coset_sum_total: u64,
    /// `p^{n-m}` times the average coset sum; never exceeds `T₃′(S)` under
    /// exhaustive enumeration.
    pub certified_lower_bound: f64,
    pub certified_numerator: u128,
    pub certified_denominator: u128,
}

fn coset_nontrivial_sum(set_mask: &[bool], a: &Subspace) -> (u64, usize, usize) {
    let params = a.params();
    let cosets = CosetDecomposition::new(a);
    let mut sum = 0u64;
    let mut dense = 0usize;
    let set_size = set_mask.iter().filter(|&&b| b).count();
    for coset in cosets.cosets() {
        let hits: Vec<usize> = coset.into_iter().filter(|&m| set_mask[m]).collect();
        for &m in &hits {
            for &x in &hits {
                if x != m && set_mask[params.combine(x, 2, m, params.p() - 1)] {
                    sum += 1;
                }
            }
        }
        // |X| ≥ α|A|/2  <=>  2|X| p^n ≥ |S| |A|
        if !hits.is_empty() && 2 * hits.len() * params.size() >= set_size * a.size() {
            dense += 1;
        }
    }
    (sum, dense, cosets.num_cosets())
}

fn random_subgroup(params: GroupParams, m_dim: usize, rng: &mut ChaCha8Rng) -> Subspace {
    loop {
        let gens: Vec<usize> = (0..m_dim).map(|_| rng.gen_range(0..params.size())).collect();
        let s = Subspace::span_indices(params, &gens).expect("indices in range");
        if s.dim() == m_dim {
            return s;
        }
    }
}

/// Averages the nontrivial progression counts of `S` inside cosets of
/// `m_dim`-dimensional subgroups and scales by `p^{n-m}`.
pub fn varnavides_estimate(set: &PointSet, m_dim: usize, sampling: SubgroupSampling) -> Result<VarnavidesReport> {
    let params = set.params();
    let n = params.n() as usize;
    if m_dim == 0 || m_dim > n {
        return Err(Error::InvalidArgument(format!(
            "subgroup dimension {m_dim} must lie in [1, {n}]"
        )));
    }
    let subgroups = match sampling {
        SubgroupSampling::Exhaustive => Subspace::enumerate_dim(params, m_dim),
        SubgroupSampling::Random { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("samples must be at least 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples).map(|_| random_subgroup(params, m_dim, &mut rng)).collect()
        }
    };
    let mask = set.mask();
    let per_group: Vec<(u64, usize, usize)> = subgroups.par_iter().map(|a| coset_nontrivial_sum(&mask, a)).collect();
    let coset_sum_total: u64 = per_group.iter().map(|x| x.0).sum();
    let dense: usize = per_group.iter().map(|x| x.1).sum();
    let examined: usize = per_group.iter().map(|x| x.2).sum();

    let scale = (params.p() as u128).pow((n - m_dim) as u32);
    let certified_numerator = scale * coset_sum_total as u128;
    let certified_denominator = subgroups.len() as u128;
    Ok(VarnavidesReport {
        m_dim,
        exhaustive: matches!(sampling, SubgroupSampling::Exhaustive),
        sampled_subgroups: subgroups.len(),
        alpha: set.len() as f64 / params.size() as f64,
        dense_coset_fraction: dense as f64 / examined as f64,
        coset_sum_total,
        certified_lower_bound: certified_numerator as f64 / certified_denominator as f64,
        certified_numerator,
        certified_denominator,
    })
}
