//! Randomized rounding of a density function to an indicator.
//!
//! Stream discipline: a SplitMix64 generator seeded with the raw 64-bit seed
//! draws one `u64` per point in canonical index order, and point `m` becomes 1
//! iff `draw / 2⁶⁴ < j(m)`. Any SplitMix64 implementation replays it.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Serialize;

use crate::apcount::lambda3_direct;
use crate::error::{Error, Result};
use crate::gfspace::DensityFunction;
use crate::subspace::{average_with, CosetDecomposition, Subspace};

/// `draw / 2⁶⁴ < prob`, evaluated exactly.
fn bernoulli(draw: u64, prob: f64) -> bool {
    if prob >= 1.0 {
        return true;
    }
    if prob <= 0.0 {
        return false;
    }
    // prob·2⁶⁴ is exact in binary floating point and below 2⁶⁴.
    let threshold = (prob * 18446744073709551616.0).ceil() as u128;
    (draw as u128) < threshold
}

/// Independent 0/1 draws with `P(j₀(m) = 1) = j(m)`.
pub fn randomize(j: &DensityFunction, seed: u64) -> DensityFunction {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let values = j
        .values()
        .iter()
        .map(|&v| if bernoulli(rng.next_u64(), v) { 1.0 } else { 0.0 })
        .collect();
    DensityFunction::new(j.params(), values).expect("0/1 values")
}

/// Flips the lowest-index zeros to one until `E ≥ target_mean`. Returns the
/// repaired function and the number of flipped points.
pub fn repair(j0: &DensityFunction, target_mean: f64) -> Result<(DensityFunction, usize)> {
    if !j0.is_indicator() {
        return Err(Error::InvalidArgument("repair needs a 0/1-valued input".into()));
    }
    if target_mean > 1.0 {
        return Err(Error::InvalidArgument(format!("target mean {target_mean} exceeds 1")));
    }
    let size = j0.params().size();
    // Slack absorbs rounding in a mean that came from a float sum.
    let required = (target_mean * size as f64 - 1e-12 * size as f64).ceil().max(0.0) as usize;
    let mut values = j0.values().to_vec();
    let mut ones = values.iter().filter(|&&v| v == 1.0).count();
    let mut flipped = 0;
    for v in values.iter_mut() {
        if ones >= required {
            break;
        }
        if *v == 0.0 {
            *v = 1.0;
            ones += 1;
            flipped += 1;
        }
    }
    Ok((DensityFunction::new(j0.params(), values)?, flipped))
}

/// `min(1, 2 exp(-r t² / 2))`.
pub fn hoeffding_bound(r: u64, t: f64) -> Result<f64> {
    if r == 0 || !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need r ≥ 1 and t > 0, got r = {r}, t = {t}"
        )));
    }
    Ok((2.0 * (-(r as f64) * t * t / 2.0).exp()).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitoredDeviation {
    pub subspace: Subspace,
    /// `max_m |(j₂)_W(m) - j_W(m)|`.
    pub max_deviation: f64,
    /// `2 exp(-|W| / 2n²)`, clamped to 1.
    pub hoeffding_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingReport {
    pub seed: u64,
    pub mean_before: f64,
    pub mean_after: f64,
    pub lambda3_before: f64,
    pub lambda3_after: f64,
    pub repaired_points: usize,
    /// Maximum over monitored subspaces; 0 when none are monitored.
    pub max_coset_deviation: f64,
    /// Largest Hoeffding tail among monitored subspaces; 1 when none.
    pub hoeffding_bound: f64,
    pub monitored: Vec<MonitoredDeviation>,
}

/// `j₂ = repair(randomize(j, seed), E(j))`, with drift and coset-deviation
/// diagnostics for every monitored subspace.
pub fn round_to_indicator(
    j: &DensityFunction,
    seed: u64,
    monitored: &[Subspace],
) -> Result<(DensityFunction, RoundingReport)> {
    let params = j.params();
    if let Some(bad) = monitored.iter().find(|w| w.params() != params) {
        return Err(Error::ParamsMismatch {
            left: (params.p(), params.n()),
            right: (bad.params().p(), bad.params().n()),
        });
    }
    let mean_before = j.expectation();
    let j0 = randomize(j, seed);
    let (j2, repaired_points) = repair(&j0, mean_before)?;

    let n = params.n() as f64;
    let monitored = monitored
        .iter()
        .map(|w| {
            let cosets = CosetDecomposition::new(w);
            let before = average_with(j, &cosets)?;
            let after = average_with(&j2, &cosets)?;
            Ok(MonitoredDeviation {
                subspace: w.clone(),
                max_deviation: after.max_abs_diff(&before)?,
                hoeffding_bound: hoeffding_bound(w.size() as u64, 1.0 / n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let report = RoundingReport {
        seed,
        mean_before,
        mean_after: j2.expectation(),
        lambda3_before: lambda3_direct(j),
        lambda3_after: lambda3_direct(&j2),
        repaired_points,
        max_coset_deviation: monitored.iter().map(|m| m.max_deviation).fold(0.0, f64::max),
        hoeffding_bound: monitored
            .iter()
            .map(|m| m.hoeffding_bound)
            .fold(if monitored.is_empty() { 1.0 } else { 0.0 }, f64::max),
        monitored,
    };
    Ok((j2, report))
}
