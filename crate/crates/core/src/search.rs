//! Minimisation of the progression count over sets of a given size, and the
//! coset-structure diagnostic.
//!
//! All comparisons use the exact raw count; ties go to the lexicographically
//! smallest member list.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::apcount::{complement_identity_holds, t3_count};
use crate::error::{Error, Result};
use crate::gfspace::{GroupParams, PointSet};
use crate::subspace::{CosetDecomposition, Subspace};

/// Default limit on `p^n` for exhaustive enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 16;
/// Default limit on the number of subspaces visited by [`structure_report`].
pub const STRUCTURE_BUDGET: u128 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMethod {
    Exhaustive,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub p: u32,
    pub n: u32,
    pub alpha: f64,
    pub size_floor: usize,
    pub best_set: Vec<usize>,
    /// Raw progression count, trivial progressions included.
    pub raw_count: u64,
    /// `p^{2n}`; `Λ₃ = raw_count / denominator`.
    pub denominator: u64,
    pub lambda3: f64,
    pub method: SearchMethod,
    pub restarts: usize,
    pub iterations: usize,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub witness: PointSet,
}

/// `⌈α p^n⌉`, tolerant of α given as a rounded fraction `k / p^n`.
pub fn size_floor(params: GroupParams, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let scaled = alpha * params.size() as f64;
    Ok(((scaled - 1e-9).ceil() as usize).clamp(1, params.size()))
}

#[allow(clippy::too_many_arguments)]
fn result_for(
    params: GroupParams,
    alpha: f64,
    floor: usize,
    witness: PointSet,
    method: SearchMethod,
    restarts: usize,
    iterations: usize,
    seed: Option<u64>,
) -> SearchResult {
    let raw_count = t3_count(&witness);
    let denominator = (params.size() as u64).pow(2);
    SearchResult {
        p: params.p(),
        n: params.n(),
        alpha,
        size_floor: floor,
        best_set: witness.members().to_vec(),
        raw_count,
        denominator,
        lambda3: raw_count as f64 / denominator as f64,
        method,
        restarts,
        iterations,
        seed,
        witness,
    }
}

fn better(a: (u64, &[usize]), b: (u64, &[usize])) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Next k-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Global minimum over all sets of size at least `⌈α p^n⌉`.
pub fn exhaustive_min(params: GroupParams, alpha: f64) -> Result<SearchResult> {
    exhaustive_min_with_limit(params, alpha, EXHAUSTIVE_LIMIT)
}

pub fn exhaustive_min_with_limit(params: GroupParams, alpha: f64, limit: usize) -> Result<SearchResult> {
    let size = params.size();
    if size > limit {
        return Err(Error::DomainTooLarge { size, limit });
    }
    let floor = size_floor(params, alpha)?;
    let mut best: Option<(u64, Vec<usize>)> = None;
    for k in floor..=size {
        // Every set contains its |S| trivial progressions.
        if best.as_ref().is_some_and(|(c, _)| (k as u64) > *c) {
            break;
        }
        let mut comb: Vec<usize> = (0..k).collect();
        loop {
            let set = PointSet::new(params, comb.clone())?;
            let c = t3_count(&set);
            if best.as_ref().is_none_or(|(bc, bm)| better((c, &comb), (*bc, bm))) {
                best = Some((c, comb.clone()));
            }
            if !next_combination(&mut comb, size) {
                break;
            }
        }
    }
    let (_, members) = best.expect("floor ≤ size, so at least one subset");
    let witness = PointSet::new(params, members)?;
    if !complement_identity_holds(&witness) {
        return Err(Error::Consistency("complementation identity failed on witness".into()));
    }
    Ok(result_for(
        params,
        alpha,
        floor,
        witness,
        SearchMethod::Exhaustive,
        0,
        0,
        None,
    ))
}

/// Progressions through `x` with `d ≠ 0` whose other two points lie in `mask`.
fn involvement(params: GroupParams, mask: &[bool], x: usize) -> u64 {
    let p = params.p();
    let mut acc = 0;
    for d in 1..params.size() {
        let plus = params.add(x, d);
        let plus2 = params.combine(x, 1, d, 2);
        let minus = params.sub(x, d);
        let minus2 = params.combine(x, 1, d, p - 2);
        acc += u64::from(mask[plus] && mask[plus2])
            + u64::from(mask[minus] && mask[plus])
            + u64::from(mask[minus2] && mask[minus]);
    }
    acc
}

/// Steepest descent over single swaps from `start`. Returns the final set
/// and the raw count after each accepted move (first entry: the start).
pub fn descend(start: &PointSet, max_iters: usize) -> (PointSet, Vec<u64>) {
    let params = start.params();
    let mut mask = start.mask();
    let mut current = t3_count(start);
    let mut history = vec![current];
    for _ in 0..max_iters {
        let members: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        let outsiders: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
        if outsiders.is_empty() {
            break;
        }
        // Best move per removed point, then the first best overall.
        let moves: Vec<Option<(u64, usize, usize)>> = members
            .par_iter()
            .map(|&u| {
                let mut without = mask.clone();
                without[u] = false;
                let base = current - involvement(params, &mask, u);
                outsiders
                    .iter()
                    .map(|&v| (base + involvement(params, &without, v), u, v))
                    .min_by_key(|&(c, _, v)| (c, v))
            })
            .collect();
        let Some((count, u, v)) = moves.into_iter().flatten().min_by_key(|&(c, u, v)| (c, u, v)) else {
            break;
        };
        if count >= current {
            break;
        }
        mask[u] = false;
        mask[v] = true;
        current = count;
        history.push(current);
    }
    let set = PointSet::from_mask(params, &mask).expect("mask length");
    (set, history)
}

/// Best-of-restarts steepest descent at the size floor.
pub fn local_min(params: GroupParams, alpha: f64, restarts: usize, iters: usize, seed: u64) -> Result<SearchResult> {
    if restarts == 0 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let floor = size_floor(params, alpha)?;
    let runs: Vec<(PointSet, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let start = PointSet::new(params, sample(&mut rng, params.size(), floor).into_vec())
                .expect("sampled indices in range");
            let (set, history) = descend(&start, iters);
            (set, history.len() - 1)
        })
        .collect();
    let iterations = runs.iter().map(|r| r.1).sum();
    let mut best: Option<(u64, PointSet)> = None;
    for (set, _) in runs {
        let c = t3_count(&set);
        if best
            .as_ref()
            .is_none_or(|(bc, bs)| better((c, set.members()), (*bc, bs.members())))
        {
            best = Some((c, set));
        }
    }
    let (_, witness) = best.expect("restarts ≥ 1");
    Ok(result_for(
        params,
        alpha,
        floor,
        witness,
        SearchMethod::Local,
        restarts,
        iterations,
        Some(seed),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureRow {
    pub w: Subspace,
    /// Representatives of the cosets where `S` holds a strict majority.
    pub a_reps: Vec<usize>,
    /// `|S Δ (A + W)|`.
    pub symmetric_difference: usize,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    #[serde(flatten)]
    pub best: StructureRow,
    /// Best row among subspaces of positive dimension.
    pub best_nontrivial: Option<StructureRow>,
    pub searched_codims: (usize, usize),
    pub subspaces_examined: usize,
}

fn structure_row(set_mask: &[bool], w: &Subspace) -> StructureRow {
    let params = w.params();
    let cosets = CosetDecomposition::new(w);
    let size = w.size();
    let mut a_reps = Vec::new();
    let mut diff = 0;
    for (i, members) in cosets.cosets().into_iter().enumerate() {
        let hits = members.iter().filter(|&&m| set_mask[m]).count();
        if 2 * hits > size {
            a_reps.push(cosets.transversal()[i]);
            diff += size - hits;
        } else {
            diff += hits;
        }
    }
    StructureRow {
        w: w.clone(),
        a_reps,
        symmetric_difference: diff,
        normalized: diff as f64 / params.size() as f64,
    }
}

/// Best approximation of `S` by a union of cosets `A + W` over every `W` of
/// codimension at most `max_codim`.
pub fn structure_report(set: &PointSet, max_codim: usize) -> Result<StructureReport> {
    structure_report_with_budget(set, max_codim, STRUCTURE_BUDGET)
}

pub fn structure_report_with_budget(set: &PointSet, max_codim: usize, budget: u128) -> Result<StructureReport> {
    let params = set.params();
    let n = params.n() as usize;
    let max_codim = max_codim.min(n);
    let count: u128 = (0..=max_codim)
        .map(|c| Subspace::count_of_dim(params, n - c))
        .fold(0u128, |a, b| a.saturating_add(b));
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    let mask = set.mask();
    let mut best: Option<StructureRow> = None;
    let mut best_nontrivial: Option<StructureRow> = None;
    let mut examined = 0;
    for codim in 0..=max_codim {
        let rows: Vec<StructureRow> = Subspace::enumerate_dim(params, n - codim)
            .par_iter()
            .map(|w| structure_row(&mask, w))
            .collect();
        examined += rows.len();
        for row in rows {
            if row.w.dim() > 0
                && best_nontrivial
                    .as_ref()
                    .is_none_or(|b| row.symmetric_difference < b.symmetric_difference)
            {
                best_nontrivial = Some(row.clone());
            }
            if best
                .as_ref()
                .is_none_or(|b| row.symmetric_difference < b.symmetric_difference)
            {
                best = Some(row);
            }
        }
    }
    Ok(StructureReport {
        best: best.expect("codimension 0 is always searched"),
        best_nontrivial,
        searched_codims: (0, max_codim),
        subspaces_examined: examined,
    })
}
