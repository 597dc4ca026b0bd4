//! Subspaces of F_p^n in reduced row-echelon form, cosets and coset averaging.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gfspace::{format_digits, DensityFunction, Element, GroupParams};

fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat: a^{p-2}
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p as u64 - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Reduces `rows` in place to reduced row-echelon form and drops zero rows.
/// Returns the pivot column of each surviving row.
fn rref(rows: &mut Vec<Vec<u32>>, p: u32) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(found) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, found);
        let inv = inv_mod(rows[r][c], p);
        for x in rows[r].iter_mut() {
            *x = (*x as u64 * inv as u64 % p as u64) as u32;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let factor = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    let sub = (factor as u64 * y as u64 % p as u64) as u32;
                    *x = (*x + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

/// A linear subspace of F_p^n with a canonical (fully reduced) echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    params: GroupParams,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(params: GroupParams) -> Self {
        Subspace {
            params,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(params: GroupParams) -> Self {
        let n = params.n() as usize;
        let basis = (0..n).map(|i| (0..n).map(|j| u32::from(i == j)).collect()).collect();
        Subspace {
            params,
            basis,
            pivots: (0..n).collect(),
        }
    }

    /// Span of digit-vector rows (entries reduced mod p).
    pub fn from_rows(params: GroupParams, rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = params.n() as usize;
        let p = params.p();
        let mut rows: Vec<Vec<u32>> = rows
            .into_iter()
            .map(|r| {
                if r.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        found: r.len(),
                    });
                }
                Ok(r.into_iter().map(|x| x % p).collect())
            })
            .collect::<Result<_>>()?;
        let pivots = rref(&mut rows, p);
        Ok(Subspace {
            params,
            basis: rows,
            pivots,
        })
    }

    /// Span of elements given by index.
    pub fn span_indices(params: GroupParams, generators: &[usize]) -> Result<Self> {
        let rows = generators
            .iter()
            .map(|&g| params.index_to_digits(g))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(params, rows)
    }

    pub fn span(params: GroupParams, generators: &[Element]) -> Result<Self> {
        let rows = generators
            .iter()
            .map(|g| {
                if g.params() != params {
                    return Err(Error::ParamsMismatch {
                        left: (params.p(), params.n()),
                        right: (g.params().p(), g.params().n()),
                    });
                }
                Ok(g.digits())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(params, rows)
    }

    pub fn params(&self) -> GroupParams {
        self.params
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn codim(&self) -> usize {
        self.params.n() as usize - self.dim()
    }

    /// p^dim.
    pub fn size(&self) -> usize {
        (self.params.p() as usize).pow(self.dim() as u32)
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn basis_indices(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| self.params.digits_to_index(r).expect("basis row length"))
            .collect()
    }

    /// Subtracts basis multiples until every pivot coordinate of `digits` is
    /// zero. The result differs from the input by an element of `self`.
    fn reduce(&self, digits: &mut [u32]) {
        let p = self.params.p();
        for (row, &c) in self.basis.iter().zip(&self.pivots) {
            let factor = digits[c];
            if factor != 0 {
                for (x, &b) in digits.iter_mut().zip(row) {
                    let sub = (factor as u64 * b as u64 % p as u64) as u32;
                    *x = (*x + p - sub) % p;
                }
            }
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        let mut d = self.params.digits(index);
        self.reduce(&mut d);
        d.iter().all(|&x| x == 0)
    }

    /// All members, enumerated by coefficient vectors in little-endian order.
    pub fn elements(&self) -> Vec<usize> {
        let basis = self.basis_indices();
        let mut out = vec![0usize];
        for b in basis {
            let mut next = Vec::with_capacity(out.len() * self.params.p() as usize);
            for c in 0..self.params.p() {
                let cb = self.params.scale(b, c);
                next.extend(out.iter().map(|&x| self.params.add(x, cb)));
            }
            out = next;
        }
        out
    }

    /// Null space of the basis under the standard dot product mod p.
    pub fn orthogonal_complement(&self) -> Subspace {
        let n = self.params.n() as usize;
        let p = self.params.p();
        let rows = (0..n)
            .filter(|c| !self.pivots.contains(c))
            .map(|free| {
                let mut x = vec![0u32; n];
                x[free] = 1;
                for (row, &pc) in self.basis.iter().zip(&self.pivots) {
                    x[pc] = (p - row[free]) % p;
                }
                x
            })
            .collect();
        Subspace::from_rows(self.params, rows).expect("row lengths are n")
    }

    /// Sum `self + other`.
    pub fn join(&self, other: &Subspace) -> Result<Subspace> {
        self.check_params(other)?;
        let rows = self.basis.iter().chain(&other.basis).cloned().collect();
        Subspace::from_rows(self.params, rows)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_params(other)?;
        let joined = self.orthogonal_complement().join(&other.orthogonal_complement())?;
        Ok(joined.orthogonal_complement())
    }

    /// The subspace spanned by all but the first `ell` basis rows, i.e. the
    /// rows with the lowest pivots are dropped.
    pub fn canonical_codim_subspace(&self, ell: usize) -> Result<Subspace> {
        if ell > self.dim() {
            return Err(Error::InsufficientDimension { ell, dim: self.dim() });
        }
        Ok(Subspace {
            params: self.params,
            basis: self.basis[ell..].to_vec(),
            pivots: self.pivots[ell..].to_vec(),
        })
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis_indices().into_iter().all(|b| other.contains(b))
    }

    fn check_params(&self, other: &Subspace) -> Result<()> {
        if self.params != other.params {
            return Err(Error::ParamsMismatch {
                left: (self.params.p(), self.params.n()),
                right: (other.params.p(), other.params.n()),
            });
        }
        Ok(())
    }

    /// Number of subspaces of dimension `k` (Gaussian binomial), saturating.
    pub fn count_of_dim(params: GroupParams, k: usize) -> u128 {
        let n = params.n() as usize;
        if k > n {
            return 0;
        }
        let p = params.p() as u128;
        let mut acc: u128 = 1;
        for i in 0..k {
            let num = p.saturating_pow((n - i) as u32).saturating_sub(1);
            let den = p.pow((i + 1) as u32) - 1;
            acc = match acc.checked_mul(num) {
                Some(v) => v / den,
                None => return u128::MAX,
            };
        }
        acc
    }

    /// Every subspace of dimension `k`, in canonical order: pivot sets in
    /// lexicographic order, then free entries counted little-endian.
    pub fn enumerate_dim(params: GroupParams, k: usize) -> Vec<Subspace> {
        let n = params.n() as usize;
        let p = params.p();
        let mut out = Vec::new();
        if k > n {
            return out;
        }
        for pivots in combinations(n, k) {
            let slots: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(r, &c)| {
                    let pivots = &pivots;
                    (c + 1..n).filter(move |j| !pivots.contains(j)).map(move |j| (r, j))
                })
                .collect();
            let mut values = vec![0u32; slots.len()];
            loop {
                let mut basis = vec![vec![0u32; n]; k];
                for (r, &c) in pivots.iter().enumerate() {
                    basis[r][c] = 1;
                }
                for (&(r, j), &v) in slots.iter().zip(&values) {
                    basis[r][j] = v;
                }
                out.push(Subspace {
                    params,
                    basis,
                    pivots: pivots.clone(),
                });
                // Odometer increment.
                let mut i = 0;
                while i < values.len() {
                    values[i] += 1;
                    if values[i] < p {
                        break;
                    }
                    values[i] = 0;
                    i += 1;
                }
                if i == values.len() {
                    break;
                }
            }
        }
        out
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for c in start..n {
            cur.push(c);
            go(c + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

impl fmt::Display for Subspace {
    /// `dim k; basis: (..); (..)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dim {}; basis:", self.dim())?;
        let rows: Vec<String> = self.basis.iter().map(|r| format_digits(r)).collect();
        if !rows.is_empty() {
            write!(f, " {}", rows.join("; "))?;
        }
        Ok(())
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Parses a generator list such as `1,0;0,1`, `(1,2); (0,1)`, or one of the
/// keywords `full` and `zero`.
pub fn parse_generators(params: GroupParams, text: &str) -> Result<Subspace> {
    let text = text.trim();
    match text {
        "full" => return Ok(Subspace::full(params)),
        "zero" | "" => return Ok(Subspace::zero(params)),
        _ => {}
    }
    let rows = text
        .split(';')
        .enumerate()
        .map(|(i, row)| {
            let row = row.trim().trim_start_matches('(').trim_end_matches(')');
            row.split(',')
                .map(|x| {
                    x.trim().parse::<u32>().map_err(|_| Error::Parse {
                        line: 1,
                        column: i + 1,
                        message: format!("bad generator coordinate '{}'", x.trim()),
                    })
                })
                .collect::<Result<Vec<u32>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Subspace::from_rows(params, rows)
}

/// Cosets of `W` represented by the complement `U` of vectors vanishing on
/// every pivot coordinate of `W`. `U ⊕ W = F_p^n` always holds, unlike the
/// orthogonal complement, which can meet `W` over GF(p).
#[derive(Debug, Clone)]
pub struct CosetDecomposition {
    subspace: Subspace,
    transversal: Vec<usize>,
    rep_pos: Vec<usize>,
}

impl CosetDecomposition {
    pub fn new(subspace: &Subspace) -> Self {
        let params = subspace.params;
        let size = params.size();
        let mut reps = vec![0usize; size];
        for (m, slot) in reps.iter_mut().enumerate() {
            let mut d = params.digits(m);
            subspace.reduce(&mut d);
            *slot = params.digits_to_index(&d).expect("n digits");
        }
        let mut transversal: Vec<usize> = (0..size).filter(|&m| reps[m] == m).collect();
        transversal.sort_unstable();
        let mut pos_of = vec![usize::MAX; size];
        for (i, &u) in transversal.iter().enumerate() {
            pos_of[u] = i;
        }
        let rep_pos = reps.iter().map(|&u| pos_of[u]).collect();
        CosetDecomposition {
            subspace: subspace.clone(),
            transversal,
            rep_pos,
        }
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn params(&self) -> GroupParams {
        self.subspace.params
    }

    /// Coset representatives in ascending index order.
    pub fn transversal(&self) -> &[usize] {
        &self.transversal
    }

    pub fn num_cosets(&self) -> usize {
        self.transversal.len()
    }

    /// Position in the transversal of the coset containing `m`.
    #[inline]
    pub fn coset_of(&self, m: usize) -> usize {
        self.rep_pos[m]
    }

    /// The representative `u` with `m - u ∈ W`.
    #[inline]
    pub fn rep_of(&self, m: usize) -> usize {
        self.transversal[self.rep_pos[m]]
    }

    /// Members of each coset, in ascending index order.
    pub fn cosets(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::with_capacity(self.subspace.size()); self.transversal.len()];
        for (m, &c) in self.rep_pos.iter().enumerate() {
            out[c].push(m);
        }
        out
    }

    /// Transversal position of `u1 + u2` re-projected onto the transversal.
    pub fn rep_combine(&self, a: usize, ca: u32, b: usize, cb: u32) -> usize {
        let params = self.params();
        self.rep_pos[params.combine(self.transversal[a], ca, self.transversal[b], cb)]
    }
}

/// `f_W(m) = |W|⁻¹ Σ_{w∈W} f(m + w)`.
pub fn average_over_cosets(f: &DensityFunction, w: &Subspace) -> Result<DensityFunction> {
    let decomposition = CosetDecomposition::new(w);
    average_with(f, &decomposition)
}

/// Coset averaging against a precomputed decomposition.
pub fn average_with(f: &DensityFunction, cosets: &CosetDecomposition) -> Result<DensityFunction> {
    if f.params() != cosets.params() {
        return Err(Error::ParamsMismatch {
            left: (f.params().p(), f.params().n()),
            right: (cosets.params().p(), cosets.params().n()),
        });
    }
    let mut values = vec![0.0; f.params().size()];
    for members in cosets.cosets() {
        let first = f.get(members[0]);
        let mean = if members.iter().all(|&m| f.get(m) == first) {
            first
        } else {
            members.iter().map(|&m| f.get(m)).sum::<f64>() / members.len() as f64
        };
        for &m in &members {
            values[m] = mean;
        }
    }
    DensityFunction::from_computed(f.params(), values)
}

/// Per-coset values of a coset-constant function, in transversal order.
/// Fails when some coset deviates from its mean by more than `tol`.
pub fn coset_values(f: &DensityFunction, cosets: &CosetDecomposition, tol: f64) -> Result<Vec<f64>> {
    let mut worst = 0.0f64;
    let values = cosets
        .cosets()
        .into_iter()
        .map(|members| {
            let v = f.get(members[0]);
            for &m in &members {
                worst = worst.max((f.get(m) - v).abs());
            }
            v
        })
        .collect();
    if worst > tol {
        return Err(Error::NotCosetConstant(worst));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfspace::PointSet;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(p: u32, n: u32) -> GroupParams {
        GroupParams::new(p, n).unwrap()
    }

    fn sub(params: GroupParams, rows: &[&[u32]]) -> Subspace {
        Subspace::from_rows(params, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    /// Every element reachable as a GF(p) combination of the generators.
    fn brute_span(params: GroupParams, gens: &[usize]) -> Vec<usize> {
        let mut reach = vec![0usize];
        for &gen in gens {
            let mut next = Vec::new();
            for &x in &reach {
                for c in 0..params.p() {
                    next.push(params.add(x, params.scale(gen, c)));
                }
            }
            next.sort_unstable();
            next.dedup();
            reach = next;
        }
        reach
    }

    #[test]
    fn span_examples() {
        let gp = g(3, 2);
        let s = sub(gp, &[&[1, 0], &[2, 0]]);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.basis(), &[vec![1, 0]]);
        assert_eq!(Subspace::span(gp, &[]).unwrap().dim(), 0);
        let s = sub(gp, &[&[1, 2], &[0, 1]]);
        assert_eq!(s.dim(), 2);
        let gens = [
            gp.digits_to_index(&[1, 2]).unwrap(),
            gp.digits_to_index(&[0, 1]).unwrap(),
        ];
        assert_eq!(brute_span(gp, &gens).len(), 9);
        assert_eq!(s, Subspace::full(gp));
    }

    #[test]
    fn complement_examples() {
        let gp = g(3, 2);
        assert_eq!(sub(gp, &[&[1, 0]]).orthogonal_complement(), sub(gp, &[&[0, 1]]));
        assert_eq!(Subspace::zero(gp).orthogonal_complement(), Subspace::full(gp));

        let g5 = g(5, 2);
        let v = sub(g5, &[&[1, 2]]);
        let perp = v.orthogonal_complement();
        let brute: Vec<usize> = (0..25)
            .filter(|&x| g5.dot(x, g5.digits_to_index(&[1, 2]).unwrap()) == 0)
            .collect();
        let mut elems = perp.elements();
        elems.sort_unstable();
        assert_eq!(elems, brute);
        assert_eq!(perp, sub(g5, &[&[3, 1]]));
    }

    #[test]
    fn intersection_examples() {
        let gp = g(3, 2);
        let x = sub(gp, &[&[1, 0]]);
        let y = sub(gp, &[&[0, 1]]);
        assert_eq!(x.intersect(&y).unwrap().dim(), 0);
        assert_eq!(x.intersect(&x).unwrap(), x);

        let g5 = g(5, 2);
        let v = sub(g5, &[&[1, 2]]);
        let both = v.intersect(&v.orthogonal_complement()).unwrap();
        let brute: Vec<usize> = (0..25)
            .filter(|&m| v.contains(m) && v.orthogonal_complement().contains(m))
            .collect();
        assert_eq!(brute.len(), 5);
        assert_eq!(both, v);
    }

    #[test]
    fn coset_examples() {
        let gp = g(3, 2);
        let w = sub(gp, &[&[0, 1]]);
        let cd = CosetDecomposition::new(&w);
        assert_eq!(cd.transversal(), &[0, 1, 2]);
        assert_eq!(CosetDecomposition::new(&Subspace::full(gp)).transversal(), &[0]);
        assert_eq!(
            CosetDecomposition::new(&Subspace::zero(gp)).transversal(),
            (0..9).collect::<Vec<_>>().as_slice()
        );
    }

    #[test]
    fn averaging_examples() {
        let gp = g(3, 2);
        let f = DensityFunction::from_fn(gp, |i| (i as f64) / 8.0).unwrap();
        let whole = average_over_cosets(&f, &Subspace::full(gp)).unwrap();
        assert!(whole.values().iter().all(|v| (v - f.expectation()).abs() < 1e-15));
        assert_eq!(average_over_cosets(&f, &Subspace::zero(gp)).unwrap(), f);

        let s = PointSet::from_digits(gp, &[&[0, 0], &[0, 1]]).unwrap();
        let fw = average_over_cosets(&DensityFunction::indicator(&s), &sub(gp, &[&[0, 1]])).unwrap();
        for m in 0..9 {
            let expect = if gp.digits(m)[0] == 0 { 2.0 / 3.0 } else { 0.0 };
            assert!((fw.get(m) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn codim_selection() {
        let gp = g(3, 2);
        let full = Subspace::full(gp);
        assert_eq!(full.canonical_codim_subspace(2).unwrap().dim(), 0);
        assert_eq!(full.canonical_codim_subspace(0).unwrap(), full);
        assert_eq!(full.canonical_codim_subspace(1).unwrap(), sub(gp, &[&[0, 1]]));
        assert!(matches!(
            full.canonical_codim_subspace(3),
            Err(Error::InsufficientDimension { .. })
        ));
    }

    #[test]
    fn display_and_parse() {
        let gp = g(5, 2);
        let v = sub(gp, &[&[1, 2]]);
        assert_eq!(v.to_string(), "dim 1; basis: (1,2)");
        assert_eq!(Subspace::zero(gp).to_string(), "dim 0; basis:");
        assert_eq!(parse_generators(gp, "(2,4)").unwrap(), v);
        assert_eq!(parse_generators(gp, "1,0;0,1").unwrap(), Subspace::full(gp));
        assert_eq!(parse_generators(gp, "zero").unwrap(), Subspace::zero(gp));
        assert!(parse_generators(gp, "1,x").is_err());
        assert!(parse_generators(gp, "1,0,0").is_err());
    }

    #[test]
    fn enumeration_counts() {
        for (p, n) in [(3u32, 1u32), (3, 2), (3, 3), (5, 2), (5, 3)] {
            let gp = g(p, n);
            for k in 0..=n as usize {
                let all = Subspace::enumerate_dim(gp, k);
                assert_eq!(all.len() as u128, Subspace::count_of_dim(gp, k));
                let mut dedup = all.clone();
                dedup.dedup();
                assert_eq!(dedup.len(), all.len());
                assert!(all.iter().all(|s| s.dim() == k));
            }
        }
        assert_eq!(Subspace::count_of_dim(g(3, 3), 2), 13);
    }

    fn random_subspace(params: GroupParams, rng: &mut ChaCha8Rng) -> Subspace {
        let k = rng.gen_range(0..=params.n() as usize);
        let gens: Vec<usize> = (0..k).map(|_| rng.gen_range(0..params.size())).collect();
        Subspace::span_indices(params, &gens).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn rank_nullity_and_double_perp(p in prop::sample::select(vec![3u32, 5, 7]), n in 1u32..5, seed in any::<u64>()) {
            let gp = g(p, n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_subspace(gp, &mut rng);
            let perp = v.orthogonal_complement();
            prop_assert_eq!(v.dim() + perp.dim(), n as usize);
            prop_assert_eq!(perp.orthogonal_complement(), v.clone());
            for b in perp.basis_indices() {
                for a in v.basis_indices() {
                    prop_assert_eq!(gp.dot(a, b), 0);
                }
            }
        }

        #[test]
        fn span_matches_brute_force(seed in any::<u64>()) {
            let gp = g(3, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let gens: Vec<usize> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..27)).collect();
            let s = Subspace::span_indices(gp, &gens).unwrap();
            let mut elems = s.elements();
            elems.sort_unstable();
            prop_assert_eq!(elems, brute_span(gp, &gens));
        }

        #[test]
        fn decomposition_is_unique(p in prop::sample::select(vec![3u32, 5]), n in 1u32..4, seed in any::<u64>()) {
            let gp = g(p, n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_subspace(gp, &mut rng);
            let cd = CosetDecomposition::new(&w);
            prop_assert_eq!(cd.num_cosets() * w.size(), gp.size());
            for m in 0..gp.size() {
                let u = cd.rep_of(m);
                prop_assert!(w.contains(gp.sub(m, u)));
                let hits = cd.transversal().iter().filter(|&&t| w.contains(gp.sub(m, t))).count();
                prop_assert_eq!(hits, 1);
            }
        }

        #[test]
        fn averaging_properties(p in prop::sample::select(vec![3u32, 5]), n in 1u32..4, seed in any::<u64>()) {
            let gp = g(p, n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = random_subspace(gp, &mut rng);
            let f = DensityFunction::from_fn(gp, |_| rng.gen::<f64>()).unwrap();
            let fw = average_over_cosets(&f, &w).unwrap();
            prop_assert!((fw.expectation() - f.expectation()).abs() < 1e-12);
            prop_assert_eq!(average_over_cosets(&fw, &w).unwrap(), fw.clone());
            for m in 0..gp.size() {
                for &b in &w.basis_indices() {
                    prop_assert_eq!(fw.get(m), fw.get(gp.add(m, b)));
                }
            }
        }
    }
}
