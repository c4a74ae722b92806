//! Square matrices of multivariate polynomials with cyclotomic coefficients.
//!
//! A [`PolyMatrix`] is stored as `Σ_e M(e) z^e`, a sorted map from exponent
//! vectors to constant N×N coefficient matrices. Para-unitarity is checked
//! through the coefficient-correlation identity, so Laurent polynomials never
//! have to be formed.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CoeffInt, CycInt};
use crate::error::{Error, Result};
use crate::functions::{is_ccc, QArray};

/// Dense N×N matrix of cyclotomic integers.
pub type CycMatrix<T = i64> = Vec<Vec<CycInt<T>>>;

fn zero_matrix<T: CoeffInt>(q: usize, n: usize) -> CycMatrix<T> {
    vec![vec![CycInt::zero(q); n]; n]
}

fn mat_mul<T: CoeffInt>(a: &CycMatrix<T>, b: &CycMatrix<T>) -> Result<CycMatrix<T>> {
    let n = a.len();
    let q = a[0][0].modulus();
    let mut out = zero_matrix(q, n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_syntactically_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_syntactically_zero() {
                    continue;
                }
                let prod = a[i][k].checked_mul(&b[k][j])?;
                out[i][j] = out[i][j].checked_add(&prod)?;
            }
        }
    }
    Ok(out)
}

fn mat_add_assign<T: CoeffInt>(acc: &mut CycMatrix<T>, b: &CycMatrix<T>) -> Result<()> {
    for (ra, rb) in acc.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            *x = x.checked_add(y)?;
        }
    }
    Ok(())
}

fn adjoint<T: CoeffInt>(a: &CycMatrix<T>) -> CycMatrix<T> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i].conjugate()).collect())
        .collect()
}

fn is_zero_matrix<T: CoeffInt>(a: &CycMatrix<T>) -> bool {
    a.iter().flatten().all(CycInt::is_zero)
}

/// `N×N` polynomial matrix in `m` variables.
#[derive(Clone, Debug)]
pub struct PolyMatrix<T = i64> {
    q: usize,
    n: usize,
    m: usize,
    coeffs: BTreeMap<Vec<usize>, CycMatrix<T>>,
}

impl<T: CoeffInt> PartialEq for PolyMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        if (self.q, self.n, self.m) != (other.q, other.n, other.m) {
            return false;
        }
        let keys: std::collections::BTreeSet<&Vec<usize>> =
            self.coeffs.keys().chain(other.coeffs.keys()).collect();
        let zero = zero_matrix::<T>(self.q, self.n);
        keys.into_iter().all(|e| {
            let a = self.coeffs.get(e).unwrap_or(&zero);
            let b = other.coeffs.get(e).unwrap_or(&zero);
            a == b
        })
    }
}

impl<T: CoeffInt> PolyMatrix<T> {
    pub fn zero(q: usize, n: usize, m: usize) -> Self {
        PolyMatrix { q, n, m, coeffs: BTreeMap::new() }
    }

    /// Constant matrix in `m` variables.
    pub fn constant(q: usize, m: usize, matrix: CycMatrix<T>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("coefficient matrix is not square".into()));
        }
        if matrix.iter().flatten().any(|c| c.modulus() != q) {
            return Err(Error::ModulusMismatch { left: q, right: matrix[0][0].modulus() });
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0; m], matrix);
        Ok(PolyMatrix { q, n, m, coeffs })
    }

    pub fn identity(q: usize, n: usize, m: usize) -> Self {
        let mut id = zero_matrix(q, n);
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = CycInt::one(q);
        }
        Self::constant(q, m, id).expect("square")
    }

    /// The constant matrix `[ω^{phases[i][j]}]`.
    pub fn from_phases(q: usize, m: usize, phases: &[Vec<usize>]) -> Result<Self> {
        let matrix = phases
            .iter()
            .map(|row| row.iter().map(|&s| CycInt::root(q, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::constant(q, m, matrix)
    }

    /// Constant permutation matrix with a one at `(u, cols[u])`.
    pub fn permutation(q: usize, m: usize, cols: &[usize]) -> Result<Self> {
        crate::functions::validate_permutation(cols, cols.len())?;
        let n = cols.len();
        let mut mat = zero_matrix(q, n);
        for (u, &v) in cols.iter().enumerate() {
            mat[u][v] = CycInt::one(q);
        }
        Self::constant(q, m, mat)
    }

    /// Diagonal matrix `diag(z_k^0, …, z_k^{p-1})`.
    pub fn delay(q: usize, p: usize, m: usize, k: usize) -> Result<Self> {
        if p < 2 || k >= m {
            return Err(Error::Domain(format!("delay needs p >= 2 and k < m (p={p}, k={k}, m={m})")));
        }
        let mut out = Self::zero(q, p, m);
        for y in 0..p {
            let mut e = vec![0; m];
            e[k] = y;
            let mut mat = zero_matrix(q, p);
            mat[y][y] = CycInt::one(q);
            out.coeffs.insert(e, mat);
        }
        Ok(out)
    }

    /// The generating matrix `Σ_y [ω^{f_ij(y)}] z^y` of a function matrix.
    pub fn from_function_matrix(fm: &FunctionMatrix) -> Self {
        let mut out = Self::zero(fm.q, fm.n, fm.m);
        let len = fm.p.pow(fm.m as u32);
        for t in 0..len {
            let e = fm.entries[0][0].coords(t);
            let mat = fm
                .entries
                .iter()
                .map(|row| row.iter().map(|f| CycInt::root(fm.q, f.table()[t]).unwrap()).collect())
                .collect();
            out.coeffs.insert(e, mat);
        }
        out
    }

    pub fn q(&self) -> usize {
        self.q
    }
    pub fn order(&self) -> usize {
        self.n
    }
    pub fn num_vars(&self) -> usize {
        self.m
    }
    pub fn support(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.coeffs.keys()
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &CycMatrix<T>)> {
        self.coeffs.iter()
    }

    /// Coefficient matrix of `z^e` (zero when absent).
    pub fn coefficient(&self, e: &[usize]) -> CycMatrix<T> {
        self.coeffs.get(e).cloned().unwrap_or_else(|| zero_matrix(self.q, self.n))
    }

    /// Inserts a coefficient matrix, adding to any existing one.
    pub fn add_term(&mut self, e: Vec<usize>, matrix: CycMatrix<T>) -> Result<()> {
        if e.len() != self.m || matrix.len() != self.n {
            return Err(Error::ShapeMismatch("term does not fit the matrix".into()));
        }
        match self.coeffs.get_mut(&e) {
            Some(acc) => mat_add_assign(acc, &matrix)?,
            None => {
                self.coeffs.insert(e, matrix);
            }
        }
        Ok(())
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.q != other.q {
            return Err(Error::ModulusMismatch { left: self.q, right: other.q });
        }
        if self.m != other.m {
            return Err(Error::ShapeMismatch(format!(
                "variable counts {} and {}; embed both into a common layout first",
                self.m, other.m
            )));
        }
        Ok(())
    }

    fn prune(mut self) -> Self {
        self.coeffs.retain(|_, m| !m.iter().flatten().all(CycInt::is_syntactically_zero));
        self
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        if self.n != other.n {
            return Err(Error::ShapeMismatch(format!("orders {} and {}", self.n, other.n)));
        }
        let mut out = Self::zero(self.q, self.n, self.m);
        for (e1, a) in &self.coeffs {
            for (e2, b) in &other.coeffs {
                let e: Vec<usize> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                out.add_term(e, mat_mul(a, b)?)?;
            }
        }
        Ok(out.prune())
    }

    /// Product of a non-empty chain of factors.
    pub fn product(factors: &[Self]) -> Result<Self> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| Error::Domain("empty product".into()))?;
        rest.iter().try_fold(first.clone(), |acc, f| acc.matmul(f))
    }

    pub fn kronecker(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let (n1, n2) = (self.n, other.n);
        let n = n1 * n2;
        let mut out = Self::zero(self.q, n, self.m);
        for (e1, a) in &self.coeffs {
            for (e2, b) in &other.coeffs {
                let e: Vec<usize> = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
                let mut mat = zero_matrix(self.q, n);
                for (i1, j1) in itertools::iproduct!(0..n1, 0..n1) {
                    for (i2, j2) in itertools::iproduct!(0..n2, 0..n2) {
                        mat[i1 * n2 + i2][j1 * n2 + j2] = a[i1][j1].checked_mul(&b[i2][j2])?;
                    }
                }
                out.add_term(e, mat)?;
            }
        }
        Ok(out.prune())
    }

    /// Block-diagonal matrix with the given blocks in order.
    pub fn block_diag(blocks: &[Self]) -> Result<Self> {
        let first = blocks.first().ok_or_else(|| Error::Domain("no blocks".into()))?;
        for b in blocks {
            first.compatible(b)?;
        }
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut out = Self::zero(first.q, n, first.m);
        let mut offset = 0;
        for b in blocks {
            for (e, mat) in &b.coeffs {
                let mut big = zero_matrix(first.q, n);
                for i in 0..b.n {
                    for j in 0..b.n {
                        big[offset + i][offset + j] = mat[i][j].clone();
                    }
                }
                out.add_term(e.clone(), big)?;
            }
            offset += b.n;
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, mat)| {
                let t = (0..self.n)
                    .map(|i| (0..self.n).map(|j| mat[j][i].clone()).collect())
                    .collect();
                (e.clone(), t)
            })
            .collect();
        PolyMatrix { coeffs, ..*self }
    }

    /// Moves local variable `k` to position `map[k]` of a `total`-variable layout.
    pub fn embed(&self, total: usize, map: &[usize]) -> Result<Self> {
        if map.len() != self.m || map.iter().any(|&v| v >= total) {
            return Err(Error::ShapeMismatch(format!(
                "variable map {map:?} for {} variables into {total}",
                self.m
            )));
        }
        let mut out = Self::zero(self.q, self.n, total);
        for (e, mat) in &self.coeffs {
            let mut g = vec![0; total];
            for (k, &v) in map.iter().enumerate() {
                g[v] += e[k];
            }
            out.add_term(g, mat.clone())?;
        }
        Ok(out)
    }

    /// Univariate restriction `z_k = Z^{powers[k]}`.
    pub fn substitute_univariate(&self, powers: &[usize]) -> Result<Self> {
        if powers.len() != self.m {
            return Err(Error::ShapeMismatch("one power per variable".into()));
        }
        let mut out = Self::zero(self.q, self.n, 1);
        for (e, mat) in &self.coeffs {
            let d: usize = e.iter().zip(powers).map(|(a, b)| a * b).sum();
            out.add_term(vec![d], mat.clone())?;
        }
        Ok(out.prune())
    }

    /// Substitution `z_k -> ω^{linear[k]} z_k` followed by scaling with
    /// `ω^{constant}`. Preserves para-unitarity and single-root coefficients.
    pub fn twist(&self, linear: &[i64], constant: i64) -> Result<Self> {
        if linear.len() != self.m {
            return Err(Error::ShapeMismatch("one phase per variable".into()));
        }
        let q = self.q as i64;
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, mat)| {
                let s: i64 = e.iter().zip(linear).map(|(&x, &c)| x as i64 * c).sum::<i64>() + constant;
                let s = s.rem_euclid(q) as usize;
                let m = mat.iter().map(|r| r.iter().map(|c| c.mul_root(s)).collect()).collect();
                (e.clone(), m)
            })
            .collect();
        Ok(PolyMatrix { coeffs, ..*self })
    }

    /// Returns `c` when `M(z)·M†(z^{-1}) = c·I`, checked shift by shift as
    /// `Σ_y M(y+τ)·M(y)† = c·δ_τ·I`.
    pub fn is_paraunitary(&self) -> Option<CycInt<T>> {
        let support: Vec<(&Vec<usize>, &CycMatrix<T>)> = self.coeffs.iter().collect();
        let mut groups: BTreeMap<Vec<i64>, Vec<(usize, usize)>> = BTreeMap::new();
        for (a, (e1, _)) in support.iter().enumerate() {
            for (b, (e2, _)) in support.iter().enumerate() {
                let tau: Vec<i64> = e1.iter().zip(e2.iter()).map(|(&x, &y)| x as i64 - y as i64).collect();
                groups.entry(tau).or_default().push((a, b));
            }
        }
        let zero_shift = vec![0i64; self.m];
        let sums: Vec<(bool, Option<CycMatrix<T>>)> = groups
            .par_iter()
            .map(|(tau, pairs)| {
                let mut acc = zero_matrix(self.q, self.n);
                for &(a, b) in pairs {
                    let prod = match mat_mul(support[a].1, &adjoint(support[b].1)) {
                        Ok(p) => p,
                        Err(_) => return (false, None),
                    };
                    if mat_add_assign(&mut acc, &prod).is_err() {
                        return (false, None);
                    }
                }
                if *tau == zero_shift {
                    (true, Some(acc))
                } else {
                    (is_zero_matrix(&acc), None)
                }
            })
            .collect();
        if sums.iter().any(|(ok, _)| !ok) {
            return None;
        }
        let center = match sums.into_iter().find_map(|(_, m)| m) {
            Some(m) => m,
            None => return None,
        };
        let c = center[0][0].clone();
        for i in 0..self.n {
            for j in 0..self.n {
                let ok = if i == j { center[i][j] == c } else { center[i][j].is_zero() };
                if !ok {
                    return None;
                }
            }
        }
        if c.is_zero() {
            None
        } else {
            Some(c)
        }
    }

    /// Reads off `f_{i,j}` with `M_{i,j}(y) = ω^{f_{i,j}(y)}` for every `y ∈ Z_p^m`.
    pub fn extract_function_matrix(&self, p: usize) -> Result<FunctionMatrix> {
        for e in self.coeffs.keys() {
            if e.iter().any(|&x| x >= p) {
                return Err(Error::Domain(format!("exponent {e:?} is outside Z_{p}")));
            }
        }
        let len = p
            .checked_pow(self.m as u32)
            .ok_or_else(|| Error::Domain("array too large".into()))?;
        let mut tables = vec![vec![vec![0usize; len]; self.n]; self.n];
        let probe = QArray::constant(self.q, p, self.m, 0);
        let zero = zero_matrix::<T>(self.q, self.n);
        for t in 0..len {
            let e = probe.coords(t);
            let mat = self.coeffs.get(&e).unwrap_or(&zero);
            for i in 0..self.n {
                for j in 0..self.n {
                    tables[i][j][t] = mat[i][j]
                        .as_single_root()
                        .ok_or_else(|| Error::NotDesired { i, j, exp: e.clone() })?;
                }
            }
        }
        let entries = tables
            .into_iter()
            .map(|row| row.into_iter().map(|tb| QArray::new(self.q, p, self.m, tb)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionMatrix { q: self.q, n: self.n, p, m: self.m, entries })
    }
}

/// The `N×N` grid of arrays read off a desired PU matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionMatrix {
    pub q: usize,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub entries: Vec<Vec<QArray>>,
}

impl FunctionMatrix {
    pub fn new(entries: Vec<Vec<QArray>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("function matrix is not square".into()));
        }
        let (q, p, m) = entries[0][0].shape();
        if entries.iter().flatten().any(|f| f.shape() != (q, p, m)) {
            return Err(Error::ShapeMismatch("entries differ in shape".into()));
        }
        Ok(FunctionMatrix { q, n, p, m, entries })
    }

    pub fn get(&self, i: usize, j: usize) -> &QArray {
        &self.entries[i][j]
    }

    pub fn row(&self, i: usize) -> &[QArray] {
        &self.entries[i]
    }

    pub fn permute_vars(&self, pi: &[usize]) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(|f| f.permute_vars(pi)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionMatrix { entries, ..self.clone() })
    }

    pub fn is_ccc(&self) -> Result<bool> {
        is_ccc(&self.entries)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Phase(usize),
    Literal(String),
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<usize>,
    matrix: Vec<Vec<EntryJson>>,
}

#[derive(Serialize, Deserialize)]
struct PolyMatrixJson {
    q: usize,
    #[serde(rename = "N")]
    n: usize,
    m: usize,
    coeffs: Vec<TermJson>,
}

const ZERO_SUM: &str = "zero-sum";

impl<T: CoeffInt> PolyMatrix<T> {
    /// JSON form; every coefficient entry must be a single root or zero.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(e, mat)| {
                let matrix = mat
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, c)| {
                                if c.is_zero() {
                                    Ok(EntryJson::Literal(ZERO_SUM.into()))
                                } else {
                                    c.as_single_root()
                                        .map(EntryJson::Phase)
                                        .ok_or_else(|| Error::NotDesired { i, j, exp: e.clone() })
                                }
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(TermJson { exp: e.clone(), matrix })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(serde_json::to_value(PolyMatrixJson { q: self.q, n: self.n, m: self.m, coeffs })?)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: PolyMatrixJson = serde_json::from_value(value.clone())?;
        let mut out = Self::zero(raw.q, raw.n, raw.m);
        for term in raw.coeffs {
            if term.matrix.len() != raw.n || term.matrix.iter().any(|r| r.len() != raw.n) {
                return Err(Error::ShapeMismatch("coefficient matrix has the wrong order".into()));
            }
            let mat = term
                .matrix
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|entry| match entry {
                            EntryJson::Phase(s) => CycInt::root(raw.q, s),
                            EntryJson::Literal(s) if s == ZERO_SUM => Ok(CycInt::zero(raw.q)),
                            EntryJson::Literal(s) => Err(Error::Serialization(format!("unknown entry {s:?}"))),
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            out.add_term(term.exp, mat)?;
        }
        Ok(out)
    }
}
