//! The group F_p^n, its elements, density functions and point sets.
//!
//! Elements are addressed by a little-endian base-p index: coordinate 0 is
//! the least significant digit. Every array, file and transform in the crate
//! uses this order.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of F_p^n with `p` an odd prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupParams {
    p: u32,
    n: u32,
    #[serde(skip)]
    size: usize,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut k = 2u64;
    while k * k <= p {
        if p.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

impl GroupParams {
    pub fn new(p: u32, n: u32) -> Result<Self> {
        if p < 3 || !is_prime(p as u64) {
            return Err(Error::InvalidPrime(p as u64));
        }
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let size = (p as usize)
            .checked_pow(n)
            .ok_or(Error::SizeOverflow { p: p as u64, n })?;
        Ok(GroupParams { p, n, size })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// p^n.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.size {
            return Err(Error::IndexOutOfRange {
                index: i,
                size: self.size,
            });
        }
        Ok(())
    }

    pub fn index_to_digits(&self, i: usize) -> Result<Vec<u32>> {
        self.check_index(i)?;
        Ok(self.digits(i))
    }

    /// Digits of an index known to be in range.
    pub fn digits(&self, mut i: usize) -> Vec<u32> {
        let p = self.p as usize;
        (0..self.n)
            .map(|_| {
                let d = (i % p) as u32;
                i /= p;
                d
            })
            .collect()
    }

    /// Inverse of [`GroupParams::digits`]; digits are reduced mod p.
    pub fn digits_to_index(&self, digits: &[u32]) -> Result<usize> {
        if digits.len() != self.n as usize {
            return Err(Error::LengthMismatch {
                expected: self.n as usize,
                found: digits.len(),
            });
        }
        let p = self.p as usize;
        Ok(digits.iter().rev().fold(0usize, |acc, &d| acc * p + (d as usize % p)))
    }

    /// `ca·a + cb·b` computed digit-wise mod p.
    #[inline]
    pub fn combine(&self, a: usize, ca: u32, b: usize, cb: u32) -> usize {
        let p = self.p as usize;
        let (ca, cb) = (ca as usize % p, cb as usize % p);
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.n {
            let d = (ca * (a % p) + cb * (b % p)) % p;
            out += d * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    #[inline]
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.combine(a, 1, b, 1)
    }

    #[inline]
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.combine(a, 1, b, self.p - 1)
    }

    #[inline]
    pub fn scale(&self, a: usize, c: u32) -> usize {
        self.combine(a, c, 0, 0)
    }

    #[inline]
    pub fn neg(&self, a: usize) -> usize {
        self.scale(a, self.p - 1)
    }

    /// Standard dot product mod p.
    #[inline]
    pub fn dot(&self, a: usize, b: usize) -> u32 {
        let p = self.p as usize;
        let (mut a, mut b) = (a, b);
        let mut acc = 0;
        for _ in 0..self.n {
            acc = (acc + (a % p) * (b % p)) % p;
            a /= p;
            b /= p;
        }
        acc as u32
    }

    /// `p^{-2n}`, the Λ₃ normalisation.
    pub fn pair_norm(&self) -> f64 {
        let s = self.size as f64;
        1.0 / (s * s)
    }

    fn ensure_same(&self, other: &GroupParams) -> Result<()> {
        if self != other {
            return Err(Error::ParamsMismatch {
                left: (self.p, self.n),
                right: (other.p, other.n),
            });
        }
        Ok(())
    }
}

impl fmt::Display for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.n)
    }
}

/// Formats digits as `(d0,d1,...)`.
pub fn format_digits(digits: &[u32]) -> String {
    let body: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
    format!("({})", body.join(","))
}

/// An element of F_p^n together with the group it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Element {
    params: GroupParams,
    index: usize,
}

impl Element {
    pub fn new(params: GroupParams, index: usize) -> Result<Self> {
        params.check_index(index)?;
        Ok(Element { params, index })
    }

    pub fn from_digits(params: GroupParams, digits: &[u32]) -> Result<Self> {
        let index = params.digits_to_index(digits)?;
        Ok(Element { params, index })
    }

    pub fn zero(params: GroupParams) -> Self {
        Element { params, index: 0 }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn params(&self) -> GroupParams {
        self.params
    }

    pub fn digits(&self) -> Vec<u32> {
        self.params.digits(self.index)
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.params.ensure_same(&other.params)?;
        Ok(Element {
            params: self.params,
            index: self.params.add(self.index, other.index),
        })
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.params.ensure_same(&other.params)?;
        Ok(Element {
            params: self.params,
            index: self.params.sub(self.index, other.index),
        })
    }

    pub fn scale(&self, c: u32) -> Element {
        Element {
            params: self.params,
            index: self.params.scale(self.index, c),
        }
    }

    pub fn dot(&self, other: &Element) -> Result<u32> {
        self.params.ensure_same(&other.params)?;
        Ok(self.params.dot(self.index, other.index))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_digits(&self.digits()))
    }
}

/// A map F_p^n → [0, 1], stored in canonical index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFunction {
    params: GroupParams,
    values: Vec<f64>,
}

/// Slack allowed when values come back from a floating-point round trip.
pub const RANGE_SLACK: f64 = 1e-12;

impl DensityFunction {
    pub fn new(params: GroupParams, values: Vec<f64>) -> Result<Self> {
        if values.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::ValueOutOfRange { index, value });
        }
        Ok(DensityFunction { params, values })
    }

    /// Like [`DensityFunction::new`], but values within [`RANGE_SLACK`] of
    /// the unit interval are clamped into it.
    pub fn from_computed(params: GroupParams, mut values: Vec<f64>) -> Result<Self> {
        for v in values.iter_mut() {
            if *v < 0.0 && *v >= -RANGE_SLACK {
                *v = 0.0;
            } else if *v > 1.0 && *v <= 1.0 + RANGE_SLACK {
                *v = 1.0;
            }
        }
        Self::new(params, values)
    }

    pub fn constant(params: GroupParams, c: f64) -> Result<Self> {
        Self::new(params, vec![c; params.size()])
    }

    pub fn from_fn(params: GroupParams, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::new(params, (0..params.size()).map(f).collect())
    }

    pub fn indicator(set: &PointSet) -> Self {
        let mut values = vec![0.0; set.params.size()];
        for &m in &set.members {
            values[m] = 1.0;
        }
        DensityFunction {
            params: set.params,
            values,
        }
    }

    pub fn params(&self) -> GroupParams {
        self.params
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// True when every value is exactly 0 or 1.
    pub fn is_indicator(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// The support as a point set, if `self` is 0/1-valued.
    pub fn support(&self) -> Option<PointSet> {
        if !self.is_indicator() {
            return None;
        }
        let members = (0..self.values.len()).filter(|&i| self.values[i] == 1.0).collect();
        Some(PointSet {
            params: self.params,
            members,
        })
    }

    /// E(f) over the whole group.
    pub fn expectation(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// E(f | X) for an arbitrary collection of indices.
    pub fn expectation_over<I>(&self, indices: I) -> Result<f64>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut count = 0usize;
        let mut sum = 0.0;
        for i in indices {
            self.params.check_index(i)?;
            sum += self.values[i];
            count += 1;
        }
        if count == 0 {
            return Err(Error::EmptySet);
        }
        Ok(sum / count as f64)
    }

    pub fn expectation_on(&self, set: &PointSet) -> Result<f64> {
        self.params.ensure_same(&set.params)?;
        self.expectation_over(set.members.iter().copied())
    }

    /// `1 - f`.
    pub fn complement(&self) -> Self {
        DensityFunction {
            params: self.params,
            values: self.values.iter().map(|v| 1.0 - v).collect(),
        }
    }

    /// E(|f - g|).
    pub fn mean_abs_diff(&self, other: &DensityFunction) -> Result<f64> {
        self.params.ensure_same(&other.params)?;
        let sum: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum();
        Ok(sum / self.values.len() as f64)
    }

    pub fn max_abs_diff(&self, other: &DensityFunction) -> Result<f64> {
        self.params.ensure_same(&other.params)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for DensityFunction {
    /// `.apf` text: header line then all values on one line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.params.p, self.params.n)?;
        let body: Vec<String> = self.values.iter().map(|v| format!("{v}")).collect();
        writeln!(f, "{}", body.join(" "))
    }
}

impl std::str::FromStr for DensityFunction {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (params, tokens) = parse_body(text)?;
        let mut values = Vec::with_capacity(tokens.len());
        for tok in &tokens {
            let v: f64 = tok.text.parse().map_err(|_| tok.error("not a decimal number"))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(tok.error(&format!("value {v} outside [0, 1]")));
            }
            values.push(v);
        }
        DensityFunction::new(params, values)
    }
}

/// A sorted, deduplicated set of elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    params: GroupParams,
    members: Vec<usize>,
}

impl PointSet {
    pub fn new(params: GroupParams, mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&last) = members.last() {
            params.check_index(last)?;
        }
        Ok(PointSet { params, members })
    }

    pub fn empty(params: GroupParams) -> Self {
        PointSet {
            params,
            members: Vec::new(),
        }
    }

    pub fn full(params: GroupParams) -> Self {
        PointSet {
            params,
            members: (0..params.size()).collect(),
        }
    }

    pub fn from_digits(params: GroupParams, points: &[&[u32]]) -> Result<Self> {
        let members = points
            .iter()
            .map(|d| params.digits_to_index(d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, members)
    }

    /// Builds a set from a membership mask in index order.
    pub fn from_mask(params: GroupParams, mask: &[bool]) -> Result<Self> {
        if mask.len() != params.size() {
            return Err(Error::LengthMismatch {
                expected: params.size(),
                found: mask.len(),
            });
        }
        let members = (0..mask.len()).filter(|&i| mask[i]).collect();
        Ok(PointSet { params, members })
    }

    pub fn params(&self) -> GroupParams {
        self.params
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.params.size()];
        for &m in &self.members {
            mask[m] = true;
        }
        mask
    }

    pub fn complement(&self) -> PointSet {
        let mask = self.mask();
        PointSet {
            params: self.params,
            members: (0..mask.len()).filter(|&i| !mask[i]).collect(),
        }
    }

    /// |self Δ other|.
    pub fn symmetric_difference_len(&self, other: &PointSet) -> Result<usize> {
        self.params.ensure_same(&other.params)?;
        let (a, b) = (self.mask(), other.mask());
        Ok(a.iter().zip(&b).filter(|(x, y)| x != y).count())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for PointSet {
    /// `.aps` text: header line then the ascending member indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.params.p, self.params.n)?;
        let body: Vec<String> = self.members.iter().map(|m| m.to_string()).collect();
        writeln!(f, "{}", body.join(" "))
    }
}

impl std::str::FromStr for PointSet {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (params, tokens) = parse_set_body(text)?;
        let mut members = Vec::with_capacity(tokens.len());
        let mut prev: Option<usize> = None;
        for tok in &tokens {
            let m: usize = tok.text.parse().map_err(|_| tok.error("not an index"))?;
            if m >= params.size() {
                return Err(tok.error(&format!("index {m} >= p^n = {}", params.size())));
            }
            if prev.is_some_and(|q| q >= m) {
                return Err(tok.error("indices must be strictly increasing"));
            }
            prev = Some(m);
            members.push(m);
        }
        Ok(PointSet { params, members })
    }
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

impl Token<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            line: self.line,
            column: self.column,
            message: format!("{message} ('{}')", self.text),
        }
    }
}

fn tokens_of(line_no: usize, line: &str) -> impl Iterator<Item = Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    line: line_no,
                    column: s + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out.into_iter()
}

fn parse_header(text: &str) -> Result<(GroupParams, std::str::Lines<'_>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing header 'p n'".into(),
    })?;
    let toks: Vec<Token> = tokens_of(1, header).collect();
    if toks.len() != 2 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("header must be 'p n', found {} fields", toks.len()),
        });
    }
    let p: u32 = toks[0].text.parse().map_err(|_| toks[0].error("bad prime"))?;
    let n: u32 = toks[1].text.parse().map_err(|_| toks[1].error("bad dimension"))?;
    Ok((GroupParams::new(p, n)?, lines))
}

fn parse_body(text: &str) -> Result<(GroupParams, Vec<Token<'_>>)> {
    let (params, lines) = parse_header(text)?;
    let tokens: Vec<Token> = lines.enumerate().flat_map(|(i, l)| tokens_of(i + 2, l)).collect();
    if tokens.len() != params.size() {
        return Err(Error::LengthMismatch {
            expected: params.size(),
            found: tokens.len(),
        });
    }
    Ok((params, tokens))
}

fn parse_set_body(text: &str) -> Result<(GroupParams, Vec<Token<'_>>)> {
    let (params, lines) = parse_header(text)?;
    let tokens = lines.enumerate().flat_map(|(i, l)| tokens_of(i + 2, l)).collect();
    Ok((params, tokens))
}
