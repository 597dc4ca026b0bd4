//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use ap3_core::apcount::{
    complement_lambda3, lambda3_direct, t3_count_by_cosets, t3_nontrivial, varnavides_estimate, SubgroupSampling,
};
use ap3_core::error::Error;
use ap3_core::fourier::{self, dft_forward, lambda3_spectral, Spectrum};
use ap3_core::improve::{construct_g, ImprovePipelineConfig};
use ap3_core::rounding::round_to_indicator;
use ap3_core::search::{exhaustive_min, local_min};
use ap3_core::selfcheck::{self, Kernels};
use ap3_core::subspace::{average_over_cosets, CosetDecomposition};
use ap3_core::{DensityFunction, GroupParams, PointSet, Subspace};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn gp(p: u32, n: u32) -> GroupParams {
    GroupParams::new(p, n).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_secs, || {
        format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64())
    })
}

fn random_density(params: GroupParams, rng: &mut ChaCha8Rng) -> DensityFunction {
    DensityFunction::from_fn(params, |_| rng.gen::<f64>()).unwrap()
}

fn random_set(params: GroupParams, rng: &mut ChaCha8Rng) -> PointSet {
    let density = rng.gen::<f64>();
    let mask: Vec<bool> = (0..params.size()).map(|_| rng.gen::<f64>() < density).collect();
    PointSet::from_mask(params, &mask).unwrap()
}

fn random_subspace(params: GroupParams, rng: &mut ChaCha8Rng) -> Subspace {
    let k = rng.gen_range(0..=params.n() as usize);
    let gens: Vec<usize> = (0..k).map(|_| rng.gen_range(0..params.size())).collect();
    Subspace::span_indices(params, &gens).unwrap()
}

/// Digit-wise `a + c·b mod p`, independent of the library's index arithmetic.
fn shift(params: GroupParams, a: usize, b: usize, c: u32) -> usize {
    let p = params.p();
    let (da, db) = (params.digits(a), params.digits(b));
    let mut index = 0usize;
    for k in (0..da.len()).rev() {
        index = index * p as usize + ((da[k] + c * db[k]) % p) as usize;
    }
    index
}

/// `Σ_{m,d} f(m) f(m+d) f(m+2d)` by the literal double loop.
fn brute_t3(f: &DensityFunction) -> f64 {
    let params = f.params();
    let mut total = 0.0;
    for m in 0..params.size() {
        for d in 0..params.size() {
            total += f.get(m) * f.get(shift(params, m, d, 1)) * f.get(shift(params, m, d, 2));
        }
    }
    total
}

fn brute_count(set: &PointSet) -> u64 {
    let params = set.params();
    let mut total = 0;
    for m in 0..params.size() {
        for d in 0..params.size() {
            if set.contains(m) && set.contains(shift(params, m, d, 1)) && set.contains(shift(params, m, d, 2)) {
                total += 1;
            }
        }
    }
    total
}

const GROUPS: [(u32, u32); 5] = [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2)];

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for (p, n) in GROUPS {
        for _ in 0..100 {
            let f = random_density(gp(p, n), &mut rng);
            let spectral = lambda3_spectral(&f).map_err(|e| e.to_string())?;
            let direct = lambda3_direct(&f);
            let brute = brute_t3(&f) / (gp(p, n).size() as f64).powi(2);
            worst = worst.max((spectral - direct).abs()).max((direct - brute).abs());
        }
    }
    ensure(worst < 1e-9, || format!("max |spectral - direct| = {worst:e}"))?;
    within(start.elapsed(), 30.0)?;
    Ok(format!("500 functions, max error {worst:e}"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut parseval_worst, mut support_worst) = (0.0f64, 0.0f64);
    for (p, n) in GROUPS {
        let params = gp(p, n);
        for _ in 0..20 {
            let f = random_density(params, &mut rng);
            let spec = dft_forward(&f);
            let lhs = spec.parseval_sum();
            let rhs: f64 = f.values().iter().map(|v| v * v).sum();
            parseval_worst = parseval_worst.max((lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE));

            let w = random_subspace(params, &mut rng);
            let fw = average_over_cosets(&f, &w).unwrap();
            let fw_spec = dft_forward(&fw);
            let perp = w.orthogonal_complement();
            for a in 0..params.size() {
                let expect = if perp.contains(a) {
                    spec.get(a)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                support_worst = support_worst.max((fw_spec.get(a) - expect).norm());
            }
        }
    }
    ensure(parseval_worst < 1e-9, || {
        format!("Parseval relative error {parseval_worst:e}")
    })?;
    ensure(support_worst < 1e-9, || format!("f_W spectrum error {support_worst:e}"))?;
    Ok(format!("Parseval {parseval_worst:e}, f_W support {support_worst:e}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let (p, n) = GROUPS[i % GROUPS.len()];
        let h = random_density(gp(p, n), &mut rng);
        let (a, b, beta) = complement_lambda3(&h);
        let complement = DensityFunction::from_fn(h.params(), |m| 1.0 - h.get(m)).unwrap();
        let independent = lambda3_direct(&h) + lambda3_direct(&complement);
        let rhs = 1.0 - 3.0 * beta + 3.0 * beta * beta;
        worst = worst.max((a + b - rhs).abs()).max((independent - rhs).abs());
    }
    ensure(worst < 1e-9, || format!("float identity error {worst:e}"))?;
    for i in 0..100 {
        let params = gp(3, 1 + (i % 3) as u32);
        let set = random_set(params, &mut rng);
        let (size, s) = (params.size() as i128, set.len() as i128);
        // N²(1 - 3β + 3β²) with β = s/N, cleared of denominators.
        let rhs = size * size - 3 * s * size + 3 * s * s;
        let lhs = brute_count(&set) as i128 + brute_count(&set.complement()) as i128;
        ensure(lhs == rhs, || format!("exact identity fails for {set}: {lhs} != {rhs}"))?;
    }
    Ok(format!("100 real within {worst:e}, 100 indicators exact"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let params = gp(3, 3);
    let mut cases = 0;
    for dim in 1..=3usize {
        for w in Subspace::enumerate_dim(params, dim) {
            for ell in 1..=dim {
                let s = w.canonical_codim_subspace(ell).map_err(|e| e.to_string())?;
                let s_set = PointSet::new(params, s.elements()).unwrap();
                let t_members: Vec<usize> = w.elements().into_iter().filter(|&x| !s.contains(x)).collect();
                let t_set = PointSet::new(params, t_members).unwrap();
                // β = (q - 1)/q with q = 3^ℓ.
                let q = 3i128.pow(ell as u32);
                let w2 = (w.size() as i128).pow(2);
                let s_expected = w2 / (q * q);
                let t_num = w2 * (2 * (q - 1) * (q - 1) - (q - 1) * q);
                ensure(t_num % (q * q) == 0 && w2 % (q * q) == 0, || {
                    "non-integer closed form".into()
                })?;
                let (ts, tt) = (brute_count(&s_set) as i128, brute_count(&t_set) as i128);
                ensure(ts == s_expected && tt == t_num / (q * q), || {
                    format!(
                        "{w}, ell {ell}: T3(S) = {ts} vs {s_expected}, T3(T) = {tt} vs {}",
                        t_num / (q * q)
                    )
                })?;
                cases += 1;
            }
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok(format!("{cases} (W, ell) pairs exact"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f5 = gp(5, 2);
    let w_special = Subspace::span_indices(f5, &[1 + 2 * 5]).unwrap();
    let v = w_special.orthogonal_complement();
    let meet = v.intersect(&w_special).unwrap();
    ensure(meet.dim() == 1, || format!("V ∩ W has dim {}", meet.dim()))?;
    let mut cases: Vec<(PointSet, Subspace)> = Vec::new();
    for _ in 0..10 {
        cases.push((random_set(f5, &mut rng), w_special.clone()));
    }
    let groups = [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2), (5, 3)];
    while cases.len() < 50 {
        let (p, n) = groups[rng.gen_range(0..groups.len())];
        let params = gp(p, n);
        cases.push((random_set(params, &mut rng), random_subspace(params, &mut rng)));
    }
    let mut overlapping = 0;
    for (set, w) in &cases {
        let expected = brute_count(set);
        let by_cosets = t3_count_by_cosets(set, w);
        ensure(by_cosets == expected, || {
            format!("{w}: coset sum {by_cosets} != {expected}")
        })?;
        let cosets = CosetDecomposition::new(w);
        let reps = cosets.transversal();
        ensure(reps.len() * w.size() == set.params().size(), || {
            "transversal size".into()
        })?;
        if w.orthogonal_complement().intersect(w).unwrap().dim() > 0 {
            overlapping += 1;
        }
    }
    Ok(format!("50 exact, {overlapping} with nontrivial V ∩ W"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let params = gp(3, 2);
    let f = DensityFunction::constant(params, 0.5).unwrap();
    let (g, report) = construct_g(&f, &ImprovePipelineConfig::new(1.0)).map_err(|e| e.to_string())?;
    ensure((report.beta - 8.0 / 9.0).abs() < 1e-15, || {
        format!("beta = {}", report.beta)
    })?;
    ensure(g.get(0) == 0.0, || format!("g(0) = {}", g.get(0)))?;
    ensure((1..9).all(|m| (g.get(m) - 9.0 / 16.0).abs() < 1e-15), || {
        format!("g = {g}")
    })?;
    ensure((g.expectation() - 0.5).abs() < 1e-12, || {
        format!("E(g) = {}", g.expectation())
    })?;
    let lambda_g = brute_t3(&g) / 81.0;
    ensure((lambda_g - 63.0 / 512.0).abs() < 1e-12, || {
        format!("Λ3(g) = {lambda_g}")
    })?;
    ensure((report.lambda3_g - lambda_g).abs() < 1e-12, || {
        "report disagrees with brute force".into()
    })?;
    ensure(
        lambda_g < brute_t3(&f) / 81.0 && (brute_t3(&f) / 81.0 - 0.125).abs() < 1e-15,
        || "Λ3(g) not below 1/8".into(),
    )?;
    ensure(report.all_passed(), || format!("ledger: {:?}", report.per_case_checks))?;
    within(start.elapsed(), 1.0)?;
    Ok(format!(
        "Λ3(g) = {lambda_g} = 63/512, {} case checks pass",
        report.per_case_checks.len()
    ))
}

/// Sum of a few planted characters, clamped to `[0, 1]`.
fn planted_density(params: GroupParams, rng: &mut ChaCha8Rng) -> DensityFunction {
    let mean = rng.gen_range(0.3..0.7);
    let terms: Vec<(usize, f64, f64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            (
                rng.gen_range(1..params.size()),
                rng.gen_range(0.05..0.35),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let noise = rng.gen_range(0.0..0.15);
    DensityFunction::from_fn(params, |m| {
        let mut v = mean + noise * (rng.gen::<f64>() - 0.5);
        for &(a, c, phase) in &terms {
            v += c * (2.0 * PI * params.dot(a, m) as f64 / params.p() as f64 + phase).cos();
        }
        v.clamp(0.0, 1.0)
    })
    .unwrap()
}

const DELTA_LADDER: [f64; 5] = [0.1, 0.2, 0.4, 0.8, 1.01];

fn criterion_7() -> Outcome {
    let params = gp(3, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut runs, mut hypothesis_cases, mut nontrivial_w) = (0, 0, 0);
    for i in 0..50 {
        let mut f = planted_density(params, &mut rng);
        if i % 2 == 1 {
            // Far from its coset averages: a 0/1 rounding of the planted density.
            f = DensityFunction::from_fn(params, |m| if rng.gen::<f64>() < f.get(m) { 1.0 } else { 0.0 }).unwrap();
        }
        for epsilon in [0.25, 0.5, 1.0] {
            let base = ImprovePipelineConfig::new(epsilon);
            let configs = std::iter::once(base).chain(DELTA_LADDER.iter().map(|&d| base.with_delta(d)));
            let mut built = None;
            for config in configs {
                match construct_g(&f, &config) {
                    Ok(out) => {
                        built = Some(out);
                        break;
                    }
                    Err(Error::InsufficientDimension { .. }) => continue,
                    Err(e) => return Err(format!("f #{i}, ε = {epsilon}: {e}")),
                }
            }
            let (g, report) = built.ok_or_else(|| format!("f #{i}, ε = {epsilon}: no delta gave dim W ≥ ℓ"))?;
            runs += 1;
            let ctx = || format!("f #{i}, ε = {epsilon}, delta {}", report.delta_used);
            ensure((g.expectation() - f.expectation()).abs() < 1e-12, || {
                format!("{}: mean drift", ctx())
            })?;
            let fw = average_over_cosets(&f, &report.w).unwrap();
            let (lf, lfw) = (brute_t3(&f) / 729.0, brute_t3(&fw) / 729.0);
            ensure(lfw <= lf + report.delta_used + 1e-9, || {
                format!("{}: Λ3(f_W) = {lfw} > Λ3(f) = {lf}", ctx())
            })?;
            ensure(report.per_case_checks.iter().all(|c| c.passed), || {
                format!("{}: case ledger failed", ctx())
            })?;
            ensure(report.aggregate_check.passed, || {
                format!("{}: aggregate bound failed", ctx())
            })?;
            if report.w.dim() > 0 && report.w.dim() < 3 {
                nontrivial_w += 1;
            }
            let deviation = f.mean_abs_diff(&fw).unwrap();
            if deviation > epsilon {
                hypothesis_cases += 1;
                let lower = 2.0 * report.v_prime.len() as f64 > epsilon * report.transversal_size as f64;
                ensure(lower, || {
                    format!(
                        "{}: |V'| = {} of {}",
                        ctx(),
                        report.v_prime.len(),
                        report.transversal_size
                    )
                })?;
            }
        }
    }
    Ok(format!(
        "{runs} runs, {nontrivial_w} with 0 < dim W < 3, {hypothesis_cases} satisfying E|f - f_W| > ε"
    ))
}

fn criterion_8() -> Outcome {
    let params = gp(3, 3);
    let j = DensityFunction::constant(params, 0.5).unwrap();
    let lambda_j = lambda3_direct(&j);
    let mut close = 0;
    for seed in 0..200u64 {
        let (j2, _) = round_to_indicator(&j, seed, &[]).map_err(|e| e.to_string())?;
        ensure(j2.expectation() >= 0.5, || {
            format!("seed {seed}: E(j2) = {}", j2.expectation())
        })?;
        if (lambda3_direct(&j2) - lambda_j).abs() <= 10.0 / 3.0 {
            close += 1;
        }
        let (again, _) = round_to_indicator(&j, seed, &[]).unwrap();
        let bits = |d: &DensityFunction| d.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        ensure(bits(&again) == bits(&j2), || format!("seed {seed} does not replay"))?;
    }
    ensure(close * 100 >= 95 * 200, || {
        format!("only {close} of 200 seeds within 10/3")
    })?;
    Ok(format!("{close}/200 seeds within 10/3, all replay bit-identically"))
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let params = gp(3, 2);
    let mut minima = Vec::new();
    for k in 1..=9 {
        let alpha = k as f64 / 9.0;
        let exact = exhaustive_min(params, alpha).map_err(|e| e.to_string())?;
        let local = local_min(params, alpha, 50, 1000, 9).map_err(|e| e.to_string())?;
        ensure(local.raw_count == exact.raw_count, || {
            format!(
                "alpha {k}/9: local {} vs exhaustive {}",
                local.raw_count, exact.raw_count
            )
        })?;
        ensure(
            brute_count(&exact.witness) == exact.raw_count && exact.witness.len() >= k,
            || format!("alpha {k}/9: witness does not certify"),
        )?;
        if k == 4 {
            ensure(exact.raw_count == 4 && exact.denominator == 81, || {
                format!("4/9 minimum {}/81", exact.raw_count)
            })?;
            ensure(exact.witness.len() == 4 && t3_nontrivial(&exact.witness) == 0, || {
                "witness is not a cap".into()
            })?;
        }
        minima.push(exact.raw_count);
    }
    within(start.elapsed(), 60.0)?;
    Ok(format!("raw minima {minima:?} (/81)"))
}

fn criterion_10() -> Outcome {
    let params = gp(3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..100 {
        let set = random_set(params, &mut rng);
        let report = varnavides_estimate(&set, 1, SubgroupSampling::Exhaustive).map_err(|e| e.to_string())?;
        let exact = t3_nontrivial(&set) as u128;
        ensure(
            report.certified_numerator <= exact * report.certified_denominator,
            || {
                format!(
                    "set #{i}: bound {}/{} exceeds {exact}",
                    report.certified_numerator, report.certified_denominator
                )
            },
        )?;
    }
    let full = PointSet::full(params);
    let report = varnavides_estimate(&full, 1, SubgroupSampling::Exhaustive).map_err(|e| e.to_string())?;
    ensure(report.dense_coset_fraction == 1.0, || {
        format!("fraction {}", report.dense_coset_fraction)
    })?;
    // Average coset sum × (p^n - 1)/(p^m - 1) recovers T3' exactly.
    let subgroups = report.sampled_subgroups as u64;
    ensure(
        report.coset_sum_total * 8 == t3_nontrivial(&full) * 2 * subgroups,
        || format!("coset sums {} over {subgroups} subgroups", report.coset_sum_total),
    )?;
    ensure(report.certified_lower_bound == 54.0, || {
        format!("bound {}", report.certified_lower_bound)
    })?;
    Ok(format!(
        "100 sets bounded exactly; full space fraction 1, bound 54 <= {}",
        t3_nontrivial(&full)
    ))
}

fn flip_axis<const K: usize>(f: &DensityFunction) -> Spectrum {
    let spec = dft_forward(f);
    let params = spec.params();
    if K >= params.n() as usize {
        return spec;
    }
    let coeffs = (0..params.size())
        .map(|a| {
            let mut d = params.digits(a);
            d[K] = (params.p() - d[K]) % params.p();
            spec.get(params.digits_to_index(&d).unwrap())
        })
        .collect();
    Spectrum::new(params, coeffs).unwrap()
}

fn conjugate_all(f: &DensityFunction) -> Spectrum {
    let spec = dft_forward(f);
    Spectrum::new(spec.params(), spec.coeffs().iter().map(|c| c.conj()).collect()).unwrap()
}

fn flipped_inverse(s: &Spectrum) -> ap3_core::Result<DensityFunction> {
    let conj = Spectrum::new(s.params(), s.coeffs().iter().map(|c| c.conj()).collect()).unwrap();
    let values = fourier::dft_inverse_complex(&conj);
    DensityFunction::from_computed(s.params(), values.iter().map(|c| c.re.clamp(0.0, 1.0)).collect())
}

fn criterion_11() -> Outcome {
    let dir = std::env::temp_dir().join(format!("ap3-acceptance-{}", std::process::id()));
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_ap3"))
        .args(["--output-dir", dir.to_str().unwrap(), "selfcheck"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let _ = std::fs::remove_dir_all(&dir);
    ensure(status.status.code() == Some(0), || {
        String::from_utf8_lossy(&status.stdout).into_owned()
    })?;
    within(elapsed, 10.0)?;

    let mutants: [(&str, Kernels); 5] = [
        (
            "conjugated forward",
            Kernels {
                forward: conjugate_all,
                inverse: fourier::dft_inverse,
            },
        ),
        (
            "axis 0 sign",
            Kernels {
                forward: flip_axis::<0>,
                inverse: fourier::dft_inverse,
            },
        ),
        (
            "axis 1 sign",
            Kernels {
                forward: flip_axis::<1>,
                inverse: fourier::dft_inverse,
            },
        ),
        (
            "axis 2 sign",
            Kernels {
                forward: flip_axis::<2>,
                inverse: fourier::dft_inverse,
            },
        ),
        (
            "conjugated inverse",
            Kernels {
                forward: dft_forward,
                inverse: flipped_inverse,
            },
        ),
    ];
    for (name, kernels) in mutants {
        ensure(!selfcheck::run_with(kernels).passed, || {
            format!("mutant '{name}' passed the suite")
        })?;
    }
    Ok(format!(
        "exit 0 in {:.2}s; 5 sign mutants rejected",
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "spectral vs direct lambda3", criterion_1),
        (2, "Parseval and f_W support", criterion_2),
        (3, "complementation identity", criterion_3),
        (4, "subspace closed forms", criterion_4),
        (5, "coset decomposition", criterion_5),
        (6, "improve worked example", criterion_6),
        (7, "improve general properties", criterion_7),
        (8, "rounding", criterion_8),
        (9, "search oracle equivalence", criterion_9),
        (10, "Varnavides estimator", criterion_10),
        (11, "selfcheck gate", criterion_11),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {name} ({secs:.2}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name} ({secs:.2}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
