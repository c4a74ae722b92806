//! q-ary arrays over `Z_p^m`, sequences, aperiodic correlations and the
//! complementary-set predicates.

use std::fmt;

use num_complex::Complex;
use num_traits::{Float, FloatConst};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{from_phase_counts, CycInt};
use crate::error::{Error, Result};

/// A map `Z_p^m -> Z_q` stored as a flat table, `y_0` varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QArray {
    q: usize,
    p: usize,
    m: usize,
    table: Vec<usize>,
}

/// A length-L sequence over `Z_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QSequence {
    q: usize,
    values: Vec<usize>,
}

/// Correlation value for every shift vector in `(-p, p)^m`.
#[derive(Clone, Debug)]
pub struct CorrelationProfile {
    pub shifts: Vec<Vec<i64>>,
    pub values: Vec<CycInt<i64>>,
}

impl CorrelationProfile {
    pub fn get(&self, shift: &[i64]) -> Option<&CycInt<i64>> {
        self.shifts.iter().position(|s| s == shift).map(|k| &self.values[k])
    }
}

fn checked_pow(p: usize, m: usize) -> Result<usize> {
    p.checked_pow(m as u32)
        .ok_or_else(|| Error::Domain(format!("{p}^{m} does not fit in memory")))
}

pub(crate) fn validate_permutation(pi: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    if pi.len() != m {
        return Err(Error::InvalidPermutation(pi.to_vec()));
    }
    for &k in pi {
        if k >= m || seen[k] {
            return Err(Error::InvalidPermutation(pi.to_vec()));
        }
        seen[k] = true;
    }
    Ok(())
}

impl QArray {
    pub fn new(q: usize, p: usize, m: usize, table: Vec<usize>) -> Result<Self> {
        if q == 0 || p == 0 {
            return Err(Error::Domain("q and p must be positive".into()));
        }
        if table.len() != checked_pow(p, m)? {
            return Err(Error::ShapeMismatch(format!(
                "table of length {} for p={p}, m={m}",
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= q) {
            return Err(Error::InvalidPhase { phase: bad as i64, q });
        }
        Ok(QArray { q, p, m, table })
    }

    /// Builds the array from an integer-valued function of the coordinates,
    /// reducing every value mod q.
    pub fn from_fn(q: usize, p: usize, m: usize, mut f: impl FnMut(&[usize]) -> i64) -> Self {
        let len = checked_pow(p, m).expect("array size overflows");
        let mut y = vec![0usize; m];
        let mut table = Vec::with_capacity(len);
        for _ in 0..len {
            table.push(f(&y).rem_euclid(q as i64) as usize);
            for c in y.iter_mut() {
                *c += 1;
                if *c < p {
                    break;
                }
                *c = 0;
            }
        }
        QArray { q, p, m, table }
    }

    pub fn constant(q: usize, p: usize, m: usize, c: usize) -> Self {
        Self::from_fn(q, p, m, |_| c as i64)
    }

    /// Boolean monomial `Π_{k∈vars} x_k` scaled by `coeff`.
    pub fn monomial(q: usize, m: usize, vars: &[usize], coeff: i64) -> Self {
        Self::from_fn(q, 2, m, |x| if vars.iter().all(|&k| x[k] == 1) { coeff } else { 0 })
    }

    pub fn q(&self) -> usize {
        self.q
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn table(&self) -> &[usize] {
        &self.table
    }
    pub fn len(&self) -> usize {
        self.table.len()
    }
    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.q, self.p, self.m)
    }

    pub fn index_of(&self, y: &[usize]) -> usize {
        y.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn coords(&self, mut t: usize) -> Vec<usize> {
        let mut y = vec![0; self.m];
        for c in y.iter_mut() {
            *c = t % self.p;
            t /= self.p;
        }
        y
    }

    pub fn get(&self, y: &[usize]) -> usize {
        self.table[self.index_of(y)]
    }

    /// The sequence `g(t) = f(y)` with `t = Σ y_k p^k`.
    pub fn evaluate_to_sequence(&self) -> QSequence {
        QSequence { q: self.q, values: self.table.clone() }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| (a + b) % self.q)
            .collect();
        Ok(QArray { table, ..self.clone() })
    }

    pub fn add_constant(&self, c: i64) -> Self {
        let q = self.q as i64;
        let table = self
            .table
            .iter()
            .map(|&a| (a as i64 + c).rem_euclid(q) as usize)
            .collect();
        QArray { table, ..self.clone() }
    }

    pub fn scale(&self, k: i64) -> Self {
        let q = self.q as i64;
        let table = self
            .table
            .iter()
            .map(|&a| (a as i64 * k).rem_euclid(q) as usize)
            .collect();
        QArray { table, ..self.clone() }
    }

    /// `(π·f)(y) = f(y_{π(0)}, …, y_{π(m-1)})`.
    pub fn permute_vars(&self, pi: &[usize]) -> Result<Self> {
        validate_permutation(pi, self.m)?;
        let mut arg = vec![0; self.m];
        Ok(Self::from_fn(self.q, self.p, self.m, |y| {
            for (k, a) in arg.iter_mut().enumerate() {
                *a = y[pi[k]];
            }
            self.get(&arg) as i64
        }))
    }

    /// Re-reads the array as a function of `total` variables, argument `k`
    /// taken from variable `map[k]`.
    pub fn lift(&self, total: usize, map: &[usize]) -> Result<Self> {
        if map.len() != self.m || map.iter().any(|&v| v >= total) {
            return Err(Error::ShapeMismatch(format!(
                "variable map {map:?} for {} variables into {total}",
                self.m
            )));
        }
        let mut arg = vec![0; self.m];
        Ok(Self::from_fn(self.q, self.p, total, |y| {
            for (k, a) in arg.iter_mut().enumerate() {
                *a = y[map[k]];
            }
            self.get(&arg) as i64
        }))
    }

    /// `f + Σ c_k x_k + c'` for a Boolean array.
    pub fn apply_affine_offset(&self, c: &[i64], c0: i64) -> Result<Self> {
        if self.p != 2 {
            return Err(Error::Unsupported("affine offsets are defined for p = 2".into()));
        }
        if c.len() != self.m {
            return Err(Error::ShapeMismatch(format!(
                "{} linear coefficients for {} variables",
                c.len(),
                self.m
            )));
        }
        Ok(Self::from_fn(self.q, 2, self.m, |x| {
            let lin: i64 = x.iter().zip(c).map(|(&xi, &ci)| xi as i64 * ci).sum();
            self.get(x) as i64 + lin + c0
        }))
    }

    /// Algebraic normal form over `Z_q`: pairs of (sorted variable set,
    /// nonzero coefficient), ordered by degree and then lexicographically.
    pub fn anf(&self) -> Result<Vec<(Vec<usize>, usize)>> {
        if self.p != 2 {
            return Err(Error::Unsupported("ANF is defined for p = 2".into()));
        }
        let q = self.q;
        let mut a = self.table.clone();
        for bit in 0..self.m {
            let b = 1usize << bit;
            for t in 0..a.len() {
                if t & b != 0 {
                    a[t] = (a[t] + q - a[t ^ b]) % q;
                }
            }
        }
        let mut terms: Vec<(Vec<usize>, usize)> = a
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(t, &c)| ((0..self.m).filter(|k| t >> k & 1 == 1).collect(), c))
            .collect();
        terms.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then_with(|| x.0.cmp(&y.0)));
        Ok(terms)
    }

    pub fn from_anf(q: usize, m: usize, terms: &[(Vec<usize>, usize)]) -> Self {
        Self::from_fn(q, 2, m, |x| {
            terms
                .iter()
                .filter(|(s, _)| s.iter().all(|&k| x[k] == 1))
                .map(|(_, c)| *c as i64)
                .sum()
        })
    }

    /// Human-readable ANF such as `x0 + 2x0x1`.
    pub fn anf_string(&self) -> Result<String> {
        let terms = self.anf()?;
        if terms.is_empty() {
            return Ok("0".into());
        }
        Ok(terms
            .iter()
            .map(|(s, c)| {
                let mono: String = s.iter().map(|k| format!("x{k}")).collect();
                match (mono.is_empty(), *c) {
                    (true, c) => c.to_string(),
                    (false, 1) => mono,
                    (false, c) => format!("{c}{mono}"),
                }
            })
            .collect::<Vec<_>>()
            .join(" + "))
    }

    /// Iterator over all shift vectors in `(-p, p)^m`, first axis fastest.
    fn shift_vectors(&self) -> Vec<Vec<i64>> {
        let side = 2 * self.p - 1;
        let count = side.pow(self.m as u32);
        let off = self.p as i64 - 1;
        (0..count)
            .map(|mut t| {
                (0..self.m)
                    .map(|_| {
                        let c = (t % side) as i64 - off;
                        t /= side;
                        c
                    })
                    .collect()
            })
            .collect()
    }

    /// Adds the phase histogram of `ω^{f1(y+τ) - f2(y)}` into `counts`.
    fn accumulate(f1: &QArray, f2: &QArray, tau: &[i64], counts: &mut [i64]) {
        let q = f1.q;
        let p = f1.p as i64;
        // Strides of the flat table per axis.
        let mut shift_offset = 0i64;
        let mut stride = 1i64;
        let mut lo = vec![0i64; f1.m];
        let mut hi = vec![0i64; f1.m];
        for k in 0..f1.m {
            shift_offset += tau[k] * stride;
            stride *= p;
            lo[k] = 0.max(-tau[k]);
            hi[k] = p.min(p - tau[k]);
            if lo[k] >= hi[k] {
                return;
            }
        }
        let mut y = lo.clone();
        loop {
            let t = y.iter().rev().fold(0i64, |acc, &c| acc * p + c);
            let a = f1.table[(t + shift_offset) as usize];
            let b = f2.table[t as usize];
            counts[(a + q - b) % q] += 1;
            let mut k = 0;
            loop {
                if k == f1.m {
                    return;
                }
                y[k] += 1;
                if y[k] < hi[k] {
                    break;
                }
                y[k] = lo[k];
                k += 1;
            }
        }
    }

    /// Aperiodic cross-correlation `C_{f1,f2}(τ)` for every `τ ∈ (-p, p)^m`.
    pub fn cross_correlation(f1: &QArray, f2: &QArray) -> Result<CorrelationProfile> {
        f1.same_shape(f2)?;
        let shifts = f1.shift_vectors();
        let values = shifts
            .iter()
            .map(|tau| {
                let mut counts = vec![0i64; f1.q];
                Self::accumulate(f1, f2, tau, &mut counts);
                from_phase_counts(f1.q, &counts)
            })
            .collect::<Result<_>>()?;
        Ok(CorrelationProfile { shifts, values })
    }

    pub fn autocorrelation(&self) -> CorrelationProfile {
        Self::cross_correlation(self, self).expect("same shape")
    }
}

impl fmt::Display for QArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p == 2 {
            write!(f, "{}", self.anf_string().map_err(|_| fmt::Error)?)
        } else {
            write!(f, "{:?}", self.table)
        }
    }
}

impl QSequence {
    pub fn new(q: usize, values: Vec<usize>) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("q must be positive".into()));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= q) {
            return Err(Error::InvalidPhase { phase: bad as i64, q });
        }
        Ok(QSequence { q, values })
    }

    pub fn q(&self) -> usize {
        self.q
    }
    pub fn values(&self) -> &[usize] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The sequence as a one-dimensional array of size L.
    pub fn to_array(&self) -> QArray {
        QArray { q: self.q, p: self.values.len(), m: 1, table: self.values.clone() }
    }

    /// The sequence as an array over `Z_p^m`, if `L = p^m`.
    pub fn reshape(&self, p: usize, m: usize) -> Result<QArray> {
        QArray::new(self.q, p, m, self.values.clone())
    }

    /// Scalar-shift correlation, `τ ∈ (-L, L)`, indexed by `τ + L - 1`.
    pub fn cross_correlation(f1: &QSequence, f2: &QSequence) -> Result<Vec<CycInt<i64>>> {
        if f1.q != f2.q || f1.len() != f2.len() {
            return Err(Error::ShapeMismatch("sequences differ in q or length".into()));
        }
        Ok(QArray::cross_correlation(&f1.to_array(), &f2.to_array())?.values)
    }

    /// Peak-to-mean envelope power ratio sampled at `oversample·L` points.
    pub fn pmepr<F: Float + FloatConst + Send + Sync>(&self, oversample: usize) -> F {
        let l = self.values.len();
        if l == 0 {
            return F::zero();
        }
        let samples = oversample.max(1) * l;
        let tau = F::TAU();
        let grid = F::from(samples).unwrap();
        let twiddle: Vec<Complex<F>> = (0..samples)
            .map(|k| Complex::from_polar(F::one(), tau * F::from(k).unwrap() / grid))
            .collect();
        let qf = F::from(self.q).unwrap();
        let symbols: Vec<Complex<F>> = self
            .values
            .iter()
            .map(|&v| Complex::from_polar(F::one(), tau * F::from(v).unwrap() / qf))
            .collect();
        let peak = (0..samples)
            .map(|j| {
                let s = symbols
                    .iter()
                    .enumerate()
                    .fold(Complex::new(F::zero(), F::zero()), |acc, (k, x)| {
                        acc + *x * twiddle[(k * j) % samples]
                    });
                s.norm_sqr()
            })
            .fold(F::zero(), F::max);
        peak / F::from(l).unwrap()
    }
}

impl fmt::Display for QSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn common_shape(fs: &[QArray]) -> Result<(usize, usize, usize)> {
    let first = fs.first().ok_or_else(|| Error::Domain("empty set".into()))?;
    for f in fs {
        first.same_shape(f)?;
    }
    Ok(first.shape())
}

/// Exact test that `Σ_j C_{a_j, b_j}(τ)` vanishes for every shift, skipping
/// `τ = 0` when `skip_zero` is set.
fn pairwise_sum_vanishes(a: &[QArray], b: &[QArray], skip_zero: bool) -> Result<bool> {
    let shifts = a[0].shift_vectors();
    let q = a[0].q;
    shifts.par_iter().try_fold(
        || true,
        |ok, tau| -> Result<bool> {
            if !ok {
                return Ok(false);
            }
            if skip_zero && tau.iter().all(|&t| t == 0) {
                return Ok(true);
            }
            let mut counts = vec![0i64; q];
            for (f1, f2) in a.iter().zip(b) {
                QArray::accumulate(f1, f2, tau, &mut counts);
            }
            Ok(from_phase_counts::<i64>(q, &counts)?.is_zero())
        },
    )
    .try_reduce(|| true, |x, y| Ok(x && y))
}

/// Complementary array set: autocorrelations sum to zero off the origin.
pub fn is_cas(fs: &[QArray]) -> Result<bool> {
    common_shape(fs)?;
    pairwise_sum_vanishes(fs, fs, true)
}

/// Complementary sequence set.
pub fn is_css(fs: &[QSequence]) -> Result<bool> {
    let arrays: Vec<QArray> = fs.iter().map(QSequence::to_array).collect();
    is_cas(&arrays)
}

/// `Σ_j C_{S1_j, S2_j}(τ) = 0` for every shift including zero.
pub fn are_mutually_orthogonal(s1: &[QArray], s2: &[QArray]) -> Result<bool> {
    if s1.len() != s2.len() {
        return Err(Error::ShapeMismatch(format!("set sizes {} and {}", s1.len(), s2.len())));
    }
    let shape = common_shape(s1)?;
    if common_shape(s2)? != shape {
        return Err(Error::ShapeMismatch("sets have different shapes".into()));
    }
    pairwise_sum_vanishes(s1, s2, false)
}

/// Complete complementary code / complete complementary arrays: every row
/// is complementary and every pair of rows is mutually orthogonal.
pub fn is_ccc(grid: &[Vec<QArray>]) -> Result<bool> {
    let n = grid.len();
    if n == 0 || grid.iter().any(|row| row.len() != n) {
        return Err(Error::ShapeMismatch("grid is not square".into()));
    }
    let all: Vec<QArray> = grid.iter().flatten().cloned().collect();
    common_shape(&all)?;
    for row in grid {
        if !is_cas(row)? {
            return Ok(false);
        }
    }
    for r in 0..n {
        for s in r + 1..n {
            if !are_mutually_orthogonal(&grid[r], &grid[s])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sequence version of [`is_ccc`].
pub fn is_ccc_sequences(grid: &[Vec<QSequence>]) -> Result<bool> {
    let arrays: Vec<Vec<QArray>> = grid
        .iter()
        .map(|row| row.iter().map(QSequence::to_array).collect())
        .collect();
    is_ccc(&arrays)
}
