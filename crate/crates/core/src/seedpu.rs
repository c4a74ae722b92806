//! Seed PU matrices `H^0·D(z_0)·H^1·…·D(z_{m-1})·H^m`, their closed-form
//! functions, quadratic term classes and the sequence families they span.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CoeffInt, CycInt};
use crate::error::{Error, Result};
use crate::functions::{validate_permutation, QArray, QSequence};
use crate::hadamard::{catalog, PhaseMatrix};
use crate::polymatrix::{CycMatrix, FunctionMatrix, PolyMatrix};

/// Default cap on the number of candidates `enumerate_s` may generate.
pub const DEFAULT_GUARD: u128 = 10_000_000;

/// The BH factors of a seed matrix; `m = hs.len() - 1` delays.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub hs: Vec<PhaseMatrix>,
}

impl SeedSpec {
    pub fn new(hs: Vec<PhaseMatrix>) -> Result<Self> {
        let first = hs.first().ok_or_else(|| Error::Domain("a seed needs at least H^0".into()))?;
        let (q, n) = (first.q, first.n);
        for h in &hs {
            if (h.q, h.n) != (q, n) {
                return Err(Error::ShapeMismatch("all BH factors must share (q, N)".into()));
            }
            if !h.is_bh() {
                return Err(Error::NotBh);
            }
        }
        Ok(SeedSpec { q, n, hs })
    }

    pub fn m(&self) -> usize {
        self.hs.len() - 1
    }

    /// `m + 1` random class members drawn from the built-in catalog.
    pub fn random(q: usize, n: usize, m: usize, rng: &mut impl Rng) -> Result<Self> {
        let reps = catalog(q, n)?;
        let hs = (0..=m)
            .map(|_| reps[rng.gen_range(0..reps.len())].random_equivalent(rng))
            .collect();
        Self::new(hs)
    }

    fn check_point(&self, y: &[usize]) -> Result<()> {
        if y.len() != self.m() || y.iter().any(|&v| v >= self.n) {
            return Err(Error::Domain(format!("point {y:?} is not in Z_{}^{}", self.n, self.m())));
        }
        Ok(())
    }

    /// `f_{i,j}(y) = Σ_k H̃^k[y_{k-1}][y_k]` with `y_{-1} = i`, `y_m = j`.
    pub fn function_phase(&self, i: usize, j: usize, y: &[usize]) -> usize {
        let m = self.m();
        let path = |k: isize| -> usize {
            if k < 0 {
                i
            } else if k as usize >= m {
                j
            } else {
                y[k as usize]
            }
        };
        (0..=m)
            .map(|k| self.hs[k].get(path(k as isize - 1), path(k as isize)))
            .sum::<usize>()
            % self.q
    }
}

/// `M(z) = H^0·D(z_0)·H^1·…·D(z_{m-1})·H^m` with `p = N`.
pub fn build_seed<T: CoeffInt>(spec: &SeedSpec) -> Result<PolyMatrix<T>> {
    let m = spec.m();
    let mut factors = Vec::with_capacity(2 * m + 1);
    for k in 0..m {
        factors.push(spec.hs[k].to_polymatrix(m));
        factors.push(PolyMatrix::delay(spec.q, spec.n, m, k)?);
    }
    factors.push(spec.hs[m].to_polymatrix(m));
    PolyMatrix::product(&factors)
}

/// The coefficient of `z^y`, as `Π_k (H^k·E_{y_k})·H^m` with `E_y` the
/// single-entry projector.
pub fn coefficient_matrix_closed_form<T: CoeffInt>(spec: &SeedSpec, y: &[usize]) -> Result<CycMatrix<T>> {
    spec.check_point(y)?;
    let (q, n) = (spec.q, spec.n);
    let mut acc: CycMatrix<T> = spec.hs[0].to_cyc_matrix();
    for (k, &yk) in y.iter().enumerate() {
        // acc·E_{y_k} keeps column y_k; then multiply by H^{k+1}.
        let next = &spec.hs[k + 1];
        let mut out = vec![vec![CycInt::zero(q); n]; n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = acc[i][yk].mul_root(next.get(yk, j));
            }
        }
        acc = out;
    }
    Ok(acc)
}

/// Function matrix of a seed, read from the closed form without any products.
pub fn seed_function_matrix(spec: &SeedSpec) -> FunctionMatrix {
    let (q, n, m) = (spec.q, spec.n, spec.m());
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| QArray::from_fn(q, n, m, |y| spec.function_phase(i, j, y) as i64))
                .collect()
        })
        .collect();
    FunctionMatrix::new(entries).expect("uniform shape")
}

/// Kronecker-delta basis function `g_i : Z_N -> {0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisFunction {
    pub q: usize,
    pub n: usize,
    pub i: usize,
    pub table: Vec<usize>,
}

impl BasisFunction {
    pub fn eval(&self, y: usize) -> usize {
        self.table[y]
    }

    /// Polynomial display: a product of `x_v` / `(1-x_v)` factors for
    /// `N = 2^n`, and a quadratic in `y` over `Z_3` for `N = q = 3`.
    pub fn polynomial(&self) -> Option<String> {
        if self.n.is_power_of_two() && self.n > 1 {
            let bits = self.n.trailing_zeros() as usize;
            let name = |v: usize| if bits == 1 { "x".to_string() } else { format!("x{v}") };
            let factors: Vec<String> = (0..bits)
                .map(|v| if self.i >> v & 1 == 1 { name(v) } else { format!("(1-{})", name(v)) })
                .collect();
            let joined = factors.concat();
            Some(joined.strip_prefix('(').and_then(|s| s.strip_suffix(')')).filter(|_| bits == 1).map(str::to_string).unwrap_or(joined))
        } else if self.n == 3 && self.q == 3 {
            Some(["2y^2+1", "2y^2+2y", "2y^2+y"][self.i].to_string())
        } else {
            None
        }
    }

    /// Coefficients `[c0, c1, c2]` of the ternary polynomial form.
    pub fn ternary_coefficients(&self) -> Option<[usize; 3]> {
        (self.n == 3 && self.q == 3).then(|| [[1, 0, 2], [0, 2, 2], [0, 1, 2]][self.i])
    }
}

pub fn basis_g(q: usize, n: usize) -> Vec<BasisFunction> {
    (0..n)
        .map(|i| BasisFunction { q, n, i, table: (0..n).map(|y| usize::from(y == i)).collect() })
        .collect()
}

/// A bivariate term `h(y_0, y_1)` over `Z_N × Z_N -> Z_q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub table: Vec<Vec<usize>>,
    pub canonical: bool,
}

impl QuadraticTerm {
    pub fn new(q: usize, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 || table.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("quadratic term table must be square".into()));
        }
        if let Some(&bad) = table.iter().flatten().find(|&&v| v >= q) {
            return Err(Error::InvalidPhase { phase: bad as i64, q });
        }
        let canonical = table[0].iter().all(|&v| v == 0) && table.iter().all(|r| r[0] == 0);
        Ok(QuadraticTerm { q, n, table, canonical })
    }

    pub fn eval(&self, y0: usize, y1: usize) -> usize {
        self.table[y0][y1]
    }

    /// Table of a Boolean function of `(x0, x1, x2, x3)` read through
    /// `y0 = x0 + 2x1`, `y1 = x2 + 2x3`.
    pub fn from_boolean(q: usize, terms: &[(&[usize], usize)]) -> Self {
        let table = (0..4)
            .map(|y0| {
                (0..4)
                    .map(|y1| {
                        let x = [y0 & 1, y0 >> 1, y1 & 1, y1 >> 1];
                        terms
                            .iter()
                            .filter(|(vars, _)| vars.iter().all(|&v| x[v] == 1))
                            .map(|(_, c)| c)
                            .sum::<usize>()
                            % q
                    })
                    .collect()
            })
            .collect();
        Self::new(q, table).expect("valid table")
    }

    /// Removes the parts depending on `y0` alone or `y1` alone.
    pub fn canonicalize(&self) -> Self {
        let q = self.q;
        let t = &self.table;
        let table = (0..self.n)
            .map(|a| (0..self.n).map(|b| (t[a][b] + t[0][0] + 2 * q - t[a][0] - t[0][b]) % q).collect())
            .collect();
        Self::new(q, table).expect("valid table")
    }

    pub fn transpose(&self) -> Self {
        let table = (0..self.n).map(|a| (0..self.n).map(|b| self.table[b][a]).collect()).collect();
        Self::new(self.q, table).expect("valid table")
    }

    pub fn scale(&self, k: usize) -> Self {
        let table = self.table.iter().map(|r| r.iter().map(|v| v * k % self.q).collect()).collect();
        Self::new(self.q, table).expect("valid table")
    }

    /// The term as a two-variable array over `Z_N`.
    pub fn to_array(&self) -> QArray {
        QArray::from_fn(self.q, self.n, 2, |y| self.table[y[0]][y[1]] as i64)
    }

    /// ANF over the Boolean variables of both arguments (`N = 2^n`).
    pub fn anf_string(&self) -> Result<String> {
        if !self.n.is_power_of_two() {
            return Err(Error::Unsupported("Boolean form needs N = 2^n".into()));
        }
        let bits = self.n.trailing_zeros() as usize;
        self.to_array().evaluate_to_sequence().reshape(2, 2 * bits)?.anf_string()
    }
}

/// Table of `Σ_{i,j} H̃_{i,j} g_{χL(i)}(y0) g_{χR(j)}(y1)`, evaluated point by point.
pub fn quadratic_term(ht: &PhaseMatrix, chi_l: &[usize], chi_r: &[usize]) -> Result<QuadraticTerm> {
    if !ht.is_bh() {
        return Err(Error::NotBh);
    }
    validate_permutation(chi_l, ht.n)?;
    validate_permutation(chi_r, ht.n)?;
    let g = basis_g(ht.q, ht.n);
    let table = (0..ht.n)
        .map(|y0| {
            (0..ht.n)
                .map(|y1| {
                    itertools::iproduct!(0..ht.n, 0..ht.n)
                        .map(|(i, j)| ht.get(i, j) * g[chi_l[i]].eval(y0) * g[chi_r[j]].eval(y1))
                        .sum::<usize>()
                        % ht.q
                })
                .collect()
        })
        .collect();
    QuadraticTerm::new(ht.q, table)
}

pub fn canonicalize_quadratic(h: &QuadraticTerm) -> QuadraticTerm {
    h.canonicalize()
}

/// The canonical class set `S_Q(q, N)` spanned by the given representatives.
pub fn compute_sq(reps: &[PhaseMatrix]) -> Result<Vec<QuadraticTerm>> {
    let mut classes = BTreeSet::new();
    for rep in reps {
        let perms: Vec<Vec<usize>> = (0..rep.n).permutations(rep.n).collect();
        for (l, r) in itertools::iproduct!(&perms, &perms) {
            classes.insert(quadratic_term(rep, l, r)?.canonicalize());
        }
    }
    Ok(classes.into_iter().collect())
}

/// `S_Q(q, N)` from the built-in catalog.
pub fn sq_from_catalog(q: usize, n: usize) -> Result<Vec<QuadraticTerm>> {
    compute_sq(&catalog(q, n)?)
}

/// Parameters of `Σ_k h_k(y_{k-1}, y_k) + Σ_k Σ_{i≥1} c_{k,i} g_i(y_k) + c'`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralForm {
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub hs: Vec<QuadraticTerm>,
    /// `linear[k][i-1] = c_{k,i}`.
    pub linear: Vec<Vec<usize>>,
    pub constant: usize,
}

impl GeneralForm {
    pub fn new(q: usize, n: usize, m: usize, hs: Vec<QuadraticTerm>, linear: Vec<Vec<usize>>, constant: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("general forms need m >= 1".into()));
        }
        if hs.len() != m - 1 || hs.iter().any(|h| (h.q, h.n) != (q, n)) {
            return Err(Error::ShapeMismatch(format!("expected {} quadratic terms over (q,N)=({q},{n})", m - 1)));
        }
        if linear.len() != m || linear.iter().any(|r| r.len() != n - 1) {
            return Err(Error::ShapeMismatch(format!("expected {m}×{} linear coefficients", n - 1)));
        }
        if linear.iter().flatten().chain([&constant]).any(|&c| c >= q) {
            return Err(Error::Domain("coefficients must lie in Z_q".into()));
        }
        Ok(GeneralForm { q, n, m, hs, linear, constant })
    }

    /// Only the quadratic chain, all linear coefficients zero.
    pub fn quadratic_only(q: usize, n: usize, hs: Vec<QuadraticTerm>) -> Result<Self> {
        let m = hs.len() + 1;
        Self::new(q, n, m, hs, vec![vec![0; n - 1]; m], 0)
    }

    pub fn assemble(&self) -> QArray {
        QArray::from_fn(self.q, self.n, self.m, |y| {
            let quad: usize = (1..self.m).map(|k| self.hs[k - 1].eval(y[k - 1], y[k])).sum();
            let lin: usize = (0..self.m)
                .map(|k| if y[k] == 0 { 0 } else { self.linear[k][y[k] - 1] })
                .sum();
            (quad + lin + self.constant) as i64
        })
    }
}

/// Grid `f_{i,j}(y) = f(y) + h(i, y_0) + h'(y_{m-1}, j)`.
pub fn function_matrix_from_general(f: &QArray, h: &QuadraticTerm, h_end: &QuadraticTerm) -> Result<FunctionMatrix> {
    let (q, n, m) = f.shape();
    if m == 0 || (h.q, h.n) != (q, n) || (h_end.q, h_end.n) != (q, n) {
        return Err(Error::ShapeMismatch("boundary terms must match the array".into()));
    }
    let entries = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    QArray::from_fn(q, n, m, |y| (f.get(y) + h.eval(i, y[0]) + h_end.eval(y[m - 1], j)) as i64)
                })
                .collect()
        })
        .collect();
    FunctionMatrix::new(entries)
}

/// True iff `g(y) = c' + Σ_k a_k(y_k)`, i.e. `g ∈ S_L(q, N)`.
pub fn in_linear_span(g: &QArray) -> bool {
    let (q, _, m) = g.shape();
    let origin = g.get(&vec![0; m]);
    (0..g.len()).all(|t| {
        let y = g.coords(t);
        let mut single = vec![0; m];
        let parts: usize = (0..m)
            .map(|k| {
                single.iter_mut().for_each(|v| *v = 0);
                single[k] = y[k];
                g.get(&single) + q - origin
            })
            .sum();
        (origin + parts) % q == g.table()[t]
    })
}

/// Every member of `S_L(q, N)` over `Z_N^m`, in a fixed order.
pub fn linear_parts(q: usize, n: usize, m: usize) -> Vec<QArray> {
    let slots = m * (n - 1) + 1;
    (0..slots)
        .map(|_| 0..q)
        .multi_cartesian_product()
        .map(|c| {
            QArray::from_fn(q, n, m, |y| {
                let lin: usize = (0..m).map(|k| if y[k] == 0 { 0 } else { c[k * (n - 1) + y[k] - 1] }).sum();
                (lin + c[slots - 1]) as i64
            })
        })
        .collect()
}

/// One coset representative `π·Σ h_k(y_{k-1}, y_k)` with its provenance.
#[derive(Clone, Debug)]
pub struct CosetBase {
    pub pi: Vec<usize>,
    pub terms: Vec<usize>,
    pub array: QArray,
}

/// All `π·Σ_k h_k(y_{k-1}, y_k)` for `π ∈ S_m` and `h_k` drawn from `sq`.
pub fn coset_bases(q: usize, n: usize, m: usize, sq: &[QuadraticTerm]) -> Result<Vec<CosetBase>> {
    let mut out = Vec::new();
    for pi in (0..m).permutations(m) {
        for terms in (1..m).map(|_| 0..sq.len()).multi_cartesian_product() {
            let hs = terms.iter().map(|&t| sq[t].clone()).collect();
            let base = GeneralForm::quadratic_only(q, n, hs)?.assemble();
            out.push(CosetBase { array: base.permute_vars(&pi)?, pi: pi.clone(), terms });
        }
    }
    Ok(out)
}

/// Closed-form size `½·m!·|S_Q|^{m-1}·q^{Nm-m+1}`.
pub fn enumeration_formula(q: usize, n: usize, m: usize, sq_len: usize) -> u128 {
    let fact: u128 = (1..=m as u128).product();
    fact * (sq_len as u128).pow(m.saturating_sub(1) as u32) * (q as u128).pow((n * m - m + 1) as u32) / 2
}

/// Exhaustive family with its counts.
#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Distinct sequences in lexicographic order.
    pub sequences: Vec<QSequence>,
    /// Candidates generated before deduplication.
    pub generated: u128,
    /// Value of [`enumeration_formula`].
    pub formula: u128,
}

/// Every sequence `π·f` with `f` a general form, deduplicated exactly.
pub fn enumerate_s(q: usize, n: usize, m: usize, guard: u128) -> Result<Enumeration> {
    let sq = sq_from_catalog(q, n)?;
    enumerate_with(q, n, m, &sq, guard)
}

/// [`enumerate_s`] over an explicit quadratic term set.
pub fn enumerate_with(q: usize, n: usize, m: usize, sq: &[QuadraticTerm], guard: u128) -> Result<Enumeration> {
    if m == 0 {
        return Err(Error::Domain("enumeration needs m >= 1".into()));
    }
    let fact: u128 = (1..=m as u128).product();
    let needed = (sq.len() as u128)
        .checked_pow(m as u32 - 1)
        .and_then(|v| v.checked_mul(fact))
        .and_then(|v| v.checked_mul((q as u128).checked_pow((n * m - m + 1) as u32)?))
        .unwrap_or(u128::MAX);
    if needed > guard {
        return Err(Error::GuardExceeded { needed, guard });
    }
    let bases = coset_bases(q, n, m, sq)?;
    let linear = linear_parts(q, n, m);
    let mut all: Vec<Vec<usize>> = bases
        .par_iter()
        .flat_map_iter(|b| linear.iter().map(move |l| b.array.add(l).expect("same shape").table().to_vec()))
        .collect();
    let generated = all.len() as u128;
    all.par_sort_unstable();
    all.dedup();
    let sequences = all.into_iter().map(|v| QSequence::new(q, v).expect("in range")).collect();
    Ok(Enumeration { sequences, generated, formula: enumeration_formula(q, n, m, sq.len()) })
}

/// `φ_1..φ_6` over `(x0, x1), (x2, x3)`, binary.
pub fn phi(i: usize) -> Result<QuadraticTerm> {
    phi_over(2, i)
}

/// `(q/2)·φ_i` over `Z_q`.
pub fn phi_over(q: usize, i: usize) -> Result<QuadraticTerm> {
    let terms: &[&[usize]] = match i {
        1 => &[&[0, 2], &[0, 3], &[1, 2]],
        2 => &[&[0, 2], &[0, 3], &[1, 3]],
        3 => &[&[0, 2], &[1, 3], &[1, 2]],
        4 => &[&[1, 3], &[0, 3], &[1, 2]],
        5 => &[&[0, 3], &[1, 2]],
        6 => &[&[1, 3], &[0, 2]],
        _ => return Err(Error::InvalidParameters(format!("φ index {i} is not in 1..=6"))),
    };
    if q % 2 != 0 {
        return Err(Error::InvalidParameters("φ terms need even q".into()));
    }
    let scaled: Vec<(&[usize], usize)> = terms.iter().map(|t| (*t, q / 2)).collect();
    Ok(QuadraticTerm::from_boolean(q, &scaled))
}

/// Admissible parameter values of `ψ_i`.
pub fn psi_parameters(i: usize) -> Result<&'static [usize]> {
    match i {
        1 | 2 => Ok(&[0, 1, 2, 3]),
        3 | 4 => Ok(&[1, 2, 3]),
        5..=9 => Ok(&[1, 3]),
        _ => Err(Error::InvalidParameters(format!("ψ index {i} is not in 1..=9"))),
    }
}

/// `ψ_i` with parameter `a` (`a_0`, `a_1` or `a_2` by index), quaternary.
pub fn psi(i: usize, a: usize) -> Result<QuadraticTerm> {
    if !psi_parameters(i)?.contains(&a) {
        return Err(Error::InvalidParameters(format!("parameter {a} is not admissible for ψ_{i}")));
    }
    let b = (a + 2) % 4;
    let terms: Vec<(&[usize], usize)> = match i {
        1 => vec![(&[1, 3], a), (&[0, 3], 2), (&[1, 2], 2)],
        2 => vec![(&[1, 2], a), (&[0, 2], 2), (&[1, 3], 2)],
        3 => vec![(&[0, 3], a), (&[0, 2], 2), (&[1, 3], 2)],
        4 => vec![(&[0, 2], a), (&[1, 2], 2), (&[0, 3], 2)],
        5 => vec![(&[1, 3], a), (&[0, 3], b), (&[1, 2], 2), (&[0, 2], 2), (&[0, 1, 3], 2)],
        6 => vec![(&[1, 2], a), (&[0, 2], b), (&[1, 3], 2), (&[0, 3], 2), (&[0, 1, 2], 2)],
        7 => vec![(&[1, 3], a), (&[1, 2], b), (&[0, 3], 2), (&[0, 2], 2), (&[1, 2, 3], 2)],
        8 => vec![(&[0, 2], a), (&[0, 3], b), (&[1, 2], 2), (&[1, 3], 2), (&[0, 2, 3], 2)],
        _ => vec![
            (&[0, 2], a),
            (&[0, 3], b),
            (&[1, 2], b),
            (&[1, 3], a),
            (&[0, 1, 2], 2),
            (&[0, 1, 3], 2),
            (&[0, 2, 3], 2),
            (&[1, 2, 3], 2),
        ],
    };
    Ok(QuadraticTerm::from_boolean(4, &terms))
}

/// Parameters for the four named seed constructions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedParams {
    /// Alphabet for construction 1 (even); fixed by the other constructions.
    #[serde(default)]
    pub q: Option<usize>,
    /// Permutation of the `m` array variables; identity when absent.
    #[serde(default)]
    pub pi: Option<Vec<usize>>,
    /// Quadratic term choice per link `k = 1..m-1` as `(index, parameter)`.
    /// Construction 2: index 1 is `y0y1`, 2 is `2y0y1`. Construction 3: `φ_index`.
    /// Construction 4: `ψ_index` with its parameter. Ignored by construction 1.
    #[serde(default)]
    pub terms: Vec<(usize, usize)>,
    /// Construction 1: `c_k` per variable. Construction 2: `c_{k,1}, c_{k,2}` per
    /// variable, flattened. Constructions 3 and 4: `c_k` per Boolean variable.
    #[serde(default)]
    pub linear: Vec<i64>,
    /// Constructions 3 and 4: `d_k` of `x_{2k} x_{2k+1}`.
    #[serde(default)]
    pub d: Vec<i64>,
    #[serde(default)]
    pub constant: i64,
}

/// Output of a named construction.
#[derive(Clone, Debug)]
pub struct NamedFamily {
    /// The generated array `f` (Boolean form for constructions 1, 3, 4).
    pub array: QArray,
    /// A complementary set containing `f`.
    pub css: Vec<QArray>,
    /// A complete complementary code whose first column is `css`.
    pub ccc: FunctionMatrix,
}

fn boolean_form(f: &QArray) -> Result<QArray> {
    let (_, p, m) = f.shape();
    if p == 2 {
        return Ok(f.clone());
    }
    let bits = p.trailing_zeros() as usize;
    f.evaluate_to_sequence().reshape(2, bits * m)
}

/// Constructions 1–4: the Golay family, the ternary family, and the
/// binary/quaternary size-4 families with their literal φ/ψ terms.
pub fn named_construction(id: u8, m: usize, params: &NamedParams) -> Result<NamedFamily> {
    if m == 0 {
        return Err(Error::InvalidParameters("m must be at least 1".into()));
    }
    let (q, n) = match id {
        1 => {
            let q = params.q.unwrap_or(2);
            if q % 2 != 0 || q == 0 {
                return Err(Error::InvalidParameters("construction 1 needs even q".into()));
            }
            (q, 2)
        }
        2 => (3, 3),
        3 => (2, 4),
        4 => (4, 4),
        _ => return Err(Error::InvalidParameters(format!("unknown construction id {id}"))),
    };
    let pi = params.pi.clone().unwrap_or_else(|| (0..m).collect());
    validate_permutation(&pi, m)?;
    let hs: Vec<QuadraticTerm> = match id {
        1 => vec![QuadraticTerm::new(q, vec![vec![0, 0], vec![0, q / 2]])?; m - 1],
        _ => {
            if params.terms.len() != m - 1 {
                return Err(Error::InvalidParameters(format!("expected {} quadratic terms", m - 1)));
            }
            params
                .terms
                .iter()
                .map(|&(i, a)| match id {
                    2 if i == 1 || i == 2 => {
                        QuadraticTerm::new(3, (0..3).map(|y0| (0..3).map(|y1| i * y0 * y1 % 3).collect()).collect())
                    }
                    2 => Err(Error::InvalidParameters(format!("ternary term index {i} is not 1 or 2"))),
                    3 => phi(i),
                    _ => psi(i, a),
                })
                .collect::<Result<_>>()?
        }
    };
    let quad = GeneralForm::quadratic_only(q, n, hs)?.assemble();
    let rep = &catalog(q, n)?[0];
    let boundary = QuadraticTerm::new(q, rep.phases.clone())?;
    let grid = function_matrix_from_general(&quad, &boundary, &boundary)?;

    // Everything below is in the output coordinates (Boolean for N = 2^n).
    let to_out = |f: &QArray| -> Result<QArray> {
        let permuted = f.permute_vars(&pi)?;
        if id == 2 {
            Ok(permuted)
        } else {
            boolean_form(&permuted)
        }
    };
    let vars = if id == 2 { m } else { m * n.trailing_zeros() as usize };
    let extra = match id {
        2 => {
            if params.linear.len() != 2 * m {
                return Err(Error::InvalidParameters(format!("expected {} linear coefficients", 2 * m)));
            }
            let linear: Vec<Vec<usize>> = params
                .linear
                .chunks(2)
                .map(|c| c.iter().map(|v| v.rem_euclid(3) as usize).collect())
                .collect();
            GeneralForm::new(3, 3, m, vec![QuadraticTerm::new(3, vec![vec![0; 3]; 3])?; m - 1], linear, params.constant.rem_euclid(3) as usize)?
                .assemble()
        }
        _ => {
            if params.linear.len() != vars {
                return Err(Error::InvalidParameters(format!("expected {vars} linear coefficients")));
            }
            let mut base = QArray::constant(q, 2, vars, 0).apply_affine_offset(&params.linear, params.constant)?;
            if id >= 3 {
                if params.d.len() != m {
                    return Err(Error::InvalidParameters(format!("expected {m} coefficients d_k")));
                }
                for (k, &dk) in params.d.iter().enumerate() {
                    base = base.add(&QArray::monomial(q, vars, &[2 * k, 2 * k + 1], dk))?;
                }
            }
            base
        }
    };
    let entries = grid
        .entries
        .iter()
        .map(|row| row.iter().map(|f| to_out(f)?.add(&extra)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let ccc = FunctionMatrix::new(entries)?;
    let array = to_out(&quad)?.add(&extra)?;
    let css = (0..n).map(|i| ccc.get(i, 0).clone()).collect();
    Ok(NamedFamily { array, css, ccc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{is_cas, is_css};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    const CASES: [(usize, usize); 5] = [(2, 2), (4, 2), (3, 3), (2, 4), (4, 4)];

    fn spec_from(q: usize, hs: &[PhaseMatrix]) -> SeedSpec {
        assert!(hs.iter().all(|h| h.q == q));
        SeedSpec::new(hs.to_vec()).unwrap()
    }

    #[test]
    fn build_seed_examples() {
        let w = crate::hadamard::walsh_kron_phase(2, 1).unwrap();
        let m0 = build_seed::<i64>(&spec_from(2, &[w.clone()])).unwrap();
        assert_eq!(m0, w.to_polymatrix(0));
        let m1 = build_seed::<i64>(&spec_from(2, &[w.clone(), w.clone()])).unwrap();
        let fm = m1.extract_function_matrix(2).unwrap();
        // [[1+z, 1-z], [1-z, 1+z]]
        assert_eq!(fm.get(0, 0).table(), &[0, 0]);
        assert_eq!(fm.get(0, 1).table(), &[0, 1]);
        let f3 = crate::hadamard::fourier_phase(3, 3).unwrap();
        let m2 = build_seed::<i64>(&spec_from(3, &[f3.clone(), f3.clone(), f3])).unwrap();
        assert_eq!(m2.is_paraunitary().unwrap().as_integer(), Some(27));
        assert!(SeedSpec::new(vec![PhaseMatrix::new(2, vec![vec![0, 0], vec![0, 0]]).unwrap()]).is_err());
    }

    #[test]
    fn closed_form_matches_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &(q, n) in &CASES {
            for m in 1..=2 {
                let spec = SeedSpec::random(q, n, m, &mut rng).unwrap();
                let built = build_seed::<i64>(&spec).unwrap();
                for t in 0..n.pow(m as u32) {
                    let y = QArray::constant(q, n, m, 0).coords(t);
                    let closed = coefficient_matrix_closed_form::<i64>(&spec, &y).unwrap();
                    assert_eq!(closed, built.coefficient(&y));
                    for i in 0..n {
                        for j in 0..n {
                            assert_eq!(closed[i][j].as_single_root(), Some(spec.function_phase(i, j, &y)));
                        }
                    }
                }
                assert_eq!(seed_function_matrix(&spec), built.extract_function_matrix(n).unwrap());
            }
        }
        let spec = SeedSpec::random(2, 2, 2, &mut rng).unwrap();
        assert!(coefficient_matrix_closed_form::<i64>(&spec, &[0, 2]).is_err());
    }

    #[test]
    fn single_delay_coefficients_have_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = SeedSpec::random(4, 4, 1, &mut rng).unwrap();
        for y in 0..4 {
            let c = coefficient_matrix_closed_form::<i64>(&spec, &[y]).unwrap();
            for (a, b) in (0..4).tuple_combinations() {
                for (r, s) in (0..4).tuple_combinations() {
                    let minor = &(&c[a][r] * &c[b][s]) - &(&c[a][s] * &c[b][r]);
                    assert!(minor.is_zero());
                }
            }
        }
    }

    #[test]
    fn basis_examples() {
        let g2 = basis_g(2, 2);
        assert_eq!(g2[0].polynomial().unwrap(), "1-x");
        assert_eq!(g2[1].polynomial().unwrap(), "x");
        let g3 = basis_g(3, 3);
        for g in &g3 {
            let c = g.ternary_coefficients().unwrap();
            for y in 0..3 {
                assert_eq!((c[0] + c[1] * y + c[2] * y * y) % 3, g.eval(y));
            }
        }
        assert_eq!(g3[1].eval(2), 0);
        assert_eq!(g3[1].eval(1), 1);
        let g4 = basis_g(4, 4);
        assert_eq!(g4[3].polynomial().unwrap(), "x0x1");
        assert_eq!(g4[0].polynomial().unwrap(), "(1-x0)(1-x1)");
        for y in 0..4 {
            assert_eq!(g4.iter().map(|g| g.eval(y)).sum::<usize>(), 1);
        }
    }

    #[test]
    fn quadratic_term_examples() {
        let w = crate::hadamard::walsh_kron_phase(2, 1).unwrap();
        let h = quadratic_term(&w, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(h.table, vec![vec![0, 0], vec![0, 1]]);
        assert!(h.canonical);
        assert_eq!(h.to_array().anf_string().unwrap(), "x0x1");
        let swapped = quadratic_term(&w, &[1, 0], &[0, 1]).unwrap();
        assert!(!swapped.canonical);
        assert_eq!(swapped.canonicalize(), h);
        assert!(in_linear_span(&swapped.to_array().add(&h.to_array().scale(-1)).unwrap()));

        let f3 = crate::hadamard::fourier_phase(3, 3).unwrap();
        let t = quadratic_term(&f3, &[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(t.canonicalize().table, vec![vec![0, 0, 0], vec![0, 1, 2], vec![0, 2, 1]]);
    }

    #[test]
    fn canonicalize_examples() {
        let h = QuadraticTerm::new(3, vec![vec![0, 0, 0], vec![0, 1, 2], vec![0, 2, 1]]).unwrap();
        assert_eq!(h.canonicalize(), h);
        let only_y0 = QuadraticTerm::new(4, (0..4).map(|y0| vec![y0; 4]).collect()).unwrap();
        assert_eq!(only_y0.canonicalize().table, vec![vec![0; 4]; 4]);
        assert_ne!(phi(5).unwrap().canonicalize(), phi(6).unwrap().canonicalize());
    }

    #[test]
    fn sq_counts() {
        for q in [2, 4, 6, 8] {
            let sq = sq_from_catalog(q, 2).unwrap();
            assert_eq!(sq.len(), 1);
            assert_eq!(sq[0].table, vec![vec![0, 0], vec![0, q / 2]]);
        }
        let s3 = sq_from_catalog(3, 3).unwrap();
        let y0y1 = |k: usize| QuadraticTerm::new(3, (0..3).map(|a| (0..3).map(|b| k * a * b % 3).collect()).collect()).unwrap();
        assert_eq!(s3, vec![y0y1(1), y0y1(2)]);
        let s24 = sq_from_catalog(2, 4).unwrap();
        let phis: BTreeSet<QuadraticTerm> = (1..=6).map(|i| phi(i).unwrap().canonicalize()).collect();
        assert_eq!(s24.into_iter().collect::<BTreeSet<_>>(), phis);
    }

    #[test]
    fn sq_44_matches_phi_and_psi_lists() {
        let s44: BTreeSet<QuadraticTerm> = sq_from_catalog(4, 4).unwrap().into_iter().collect();
        assert_eq!(s44.len(), 24);
        let twice_phi: BTreeSet<QuadraticTerm> = (1..=6).map(|i| phi_over(4, i).unwrap().canonicalize()).collect();
        assert_eq!(twice_phi.len(), 6);
        assert!(twice_phi.is_subset(&s44));
        let mut psis = BTreeSet::new();
        let mut per_index = Vec::new();
        for i in 1..=9 {
            let classes: BTreeSet<QuadraticTerm> = psi_parameters(i)
                .unwrap()
                .iter()
                .map(|&a| psi(i, a).unwrap().canonicalize())
                .collect();
            per_index.push(classes.len());
            psis.extend(classes);
        }
        assert_eq!(per_index, vec![4, 4, 3, 3, 2, 2, 2, 2, 2]);
        assert_eq!(psis, s44);
    }

    #[test]
    fn psi_anf_round_trips_paper_form() {
        // f1 of the worked quaternary example is ψ_5 with a_2 = 1.
        assert_eq!(psi(5, 1).unwrap().anf_string().unwrap(), "2x0x2 + 3x0x3 + 2x1x2 + x1x3 + 2x0x1x3");
        assert_eq!(phi(5).unwrap().anf_string().unwrap(), "x0x3 + x1x2");
    }

    #[test]
    fn assemble_examples() {
        let zero = GeneralForm::quadratic_only(2, 2, vec![]).unwrap();
        assert_eq!(zero.assemble(), QArray::constant(2, 2, 1, 0));
        let h = QuadraticTerm::new(2, vec![vec![0, 0], vec![0, 1]]).unwrap();
        let rs = GeneralForm::quadratic_only(2, 2, vec![h.clone(), h]).unwrap().assemble();
        assert_eq!(rs.anf_string().unwrap(), "x0x1 + x1x2");
        let t = QuadraticTerm::new(3, (0..3).map(|a| (0..3).map(|b| a * b % 3).collect()).collect()).unwrap();
        let gf = GeneralForm::new(3, 3, 2, vec![t], vec![vec![1, 2], vec![0, 1]], 2).unwrap();
        let f = gf.assemble();
        assert_eq!(f.get(&[2, 1]), (2 + 2 + 0 + 2) % 3);
        assert!(GeneralForm::new(3, 3, 2, vec![], vec![vec![0, 0]; 2], 0).is_err());
    }

    #[test]
    fn general_grid_for_binary_case() {
        let q = 4;
        let h = QuadraticTerm::new(q, vec![vec![0, 0], vec![0, 2]]).unwrap();
        let f = GeneralForm::quadratic_only(q, 2, vec![h.clone(), h.clone()]).unwrap().assemble();
        let grid = function_matrix_from_general(&f, &h, &h).unwrap();
        let x = |k: usize| QArray::monomial(q, 3, &[k], 2);
        assert_eq!(grid.get(0, 1), &f.add(&x(2)).unwrap());
        assert_eq!(grid.get(1, 0), &f.add(&x(0)).unwrap());
        assert_eq!(grid.get(1, 1), &f.add(&x(0)).unwrap().add(&x(2)).unwrap());
        assert!(grid.is_ccc().unwrap());
    }

    #[test]
    fn general_grids_are_ccc_under_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for &(q, n) in &[(3usize, 3usize), (4, 2), (2, 4)] {
            let sq = sq_from_catalog(q, n).unwrap();
            for _ in 0..3 {
                let m = rng.gen_range(1..=2);
                let hs = (1..m).map(|_| sq[rng.gen_range(0..sq.len())].clone()).collect();
                let linear = (0..m).map(|_| (1..n).map(|_| rng.gen_range(0..q)).collect()).collect();
                let f = GeneralForm::new(q, n, m, hs, linear, rng.gen_range(0..q)).unwrap().assemble();
                let h = &sq[rng.gen_range(0..sq.len())];
                let h2 = &sq[rng.gen_range(0..sq.len())];
                let grid = function_matrix_from_general(&f, h, h2).unwrap();
                let mut pi: Vec<usize> = (0..m).collect();
                rand::seq::SliceRandom::shuffle(pi.as_mut_slice(), &mut rng);
                assert!(grid.permute_vars(&pi).unwrap().is_ccc().unwrap());
            }
        }
    }

    #[test]
    fn extracted_functions_reduce_to_general_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for &(q, n) in &CASES {
            let sq: BTreeSet<QuadraticTerm> = sq_from_catalog(q, n).unwrap().into_iter().collect();
            let spec = SeedSpec::random(q, n, 3, &mut rng).unwrap();
            let fm = seed_function_matrix(&spec);
            let terms: Vec<QuadraticTerm> = (1..3)
                .map(|k| QuadraticTerm::new(q, spec.hs[k].phases.clone()).unwrap().canonicalize())
                .collect();
            assert!(terms.iter().all(|t| sq.contains(t)));
            let chain = GeneralForm::quadratic_only(q, n, terms).unwrap().assemble();
            let h0 = QuadraticTerm::new(q, spec.hs[0].phases.clone()).unwrap();
            let h3 = QuadraticTerm::new(q, spec.hs[3].phases.clone()).unwrap();
            let grid = function_matrix_from_general(&chain, &h0, &h3).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let diff = fm.get(i, j).add(&grid.get(i, j).scale(-1)).unwrap();
                    assert!(in_linear_span(&diff));
                }
            }
        }
    }

    #[test]
    fn linear_span_has_expected_size() {
        for &(q, n) in &CASES {
            for m in 1..=2 {
                let parts = linear_parts(q, n, m);
                let distinct: BTreeSet<&QArray> = parts.iter().collect();
                assert_eq!(distinct.len(), q.pow((n * m - m + 1) as u32));
                assert!(parts.iter().all(in_linear_span));
            }
        }
    }

    #[test]
    fn enumeration_small_counts() {
        let e = enumerate_s(2, 2, 3, DEFAULT_GUARD).unwrap();
        assert_eq!(e.sequences.len(), 48);
        assert_eq!(e.formula, 48);
        let e = enumerate_s(3, 3, 2, DEFAULT_GUARD).unwrap();
        assert_eq!(e.sequences.len(), 486);
        assert!(matches!(enumerate_s(4, 4, 3, DEFAULT_GUARD), Err(Error::GuardExceeded { .. })));
    }

    /// The only coincidences are the reversal pairs, so every sequence is
    /// generated exactly twice.
    #[test]
    fn every_sequence_has_multiplicity_two() {
        for (q, n, m) in [(2, 2, 3), (3, 3, 2)] {
            let sq = sq_from_catalog(q, n).unwrap();
            let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
            let linear = linear_parts(q, n, m);
            for b in coset_bases(q, n, m, &sq).unwrap() {
                for l in &linear {
                    *counts.entry(b.array.add(l).unwrap().table().to_vec()).or_default() += 1;
                }
            }
            assert!(counts.values().all(|&c| c == 2), "(q,N,m) = ({q},{n},{m})");
        }
    }

    #[test]
    fn binary_n2_family_is_the_standard_golay_set() {
        for (q, m) in [(2usize, 3usize), (4, 3)] {
            let e = enumerate_s(q, 2, m, DEFAULT_GUARD).unwrap();
            let mut standard = BTreeSet::new();
            for pi in (0..m).permutations(m) {
                let quad = QArray::from_fn(q, 2, m, |x| {
                    ((q / 2) * (1..m).map(|k| x[pi[k - 1]] * x[pi[k]]).sum::<usize>()) as i64
                });
                for c in (0..=m).map(|_| 0..q as i64).multi_cartesian_product() {
                    standard.insert(quad.apply_affine_offset(&c[..m], c[m]).unwrap().table().to_vec());
                }
            }
            let got: BTreeSet<Vec<usize>> = e.sequences.iter().map(|s| s.values().to_vec()).collect();
            assert_eq!(got, standard);
        }
    }

    #[test]
    fn named_construction_examples() {
        let params = NamedParams { q: Some(2), linear: vec![0; 3], ..Default::default() };
        let fam = named_construction(1, 3, &params).unwrap();
        assert_eq!(fam.array.anf_string().unwrap(), "x0x1 + x1x2");
        assert_eq!(fam.css[1].anf_string().unwrap(), "x0 + x0x1 + x1x2");
        assert!(is_cas(&fam.css).unwrap());
        assert!(fam.ccc.is_ccc().unwrap());

        let params = NamedParams { terms: vec![(5, 1)], linear: vec![0; 4], d: vec![0; 2], ..Default::default() };
        let fam = named_construction(4, 2, &params).unwrap();
        let f1 = QArray::from_anf(
            4,
            4,
            &[(vec![1, 3], 1), (vec![0, 3], 3), (vec![1, 2], 2), (vec![0, 2], 2), (vec![0, 1, 3], 2)],
        );
        assert_eq!(fam.array, f1);
        let seqs: Vec<QSequence> = fam.css.iter().map(QArray::evaluate_to_sequence).collect();
        assert!(is_css(&seqs).unwrap());

        let params = NamedParams { terms: vec![(5, 0)], linear: vec![1, 0, 1, 1], d: vec![1, 0], ..Default::default() };
        let fam = named_construction(3, 2, &params).unwrap();
        assert_eq!(fam.array.len(), 16);
        assert!(is_cas(&fam.css).unwrap());
        assert!(fam.ccc.is_ccc().unwrap());

        let params = NamedParams { pi: Some(vec![1, 0]), terms: vec![(2, 0)], linear: vec![1, 2, 0, 0], constant: 1, ..Default::default() };
        let fam = named_construction(2, 2, &params).unwrap();
        assert!(fam.ccc.is_ccc().unwrap());

        assert!(named_construction(5, 2, &NamedParams::default()).is_err());
        assert!(named_construction(4, 2, &NamedParams { terms: vec![(5, 2)], linear: vec![0; 4], d: vec![0; 2], ..Default::default() }).is_err());
    }
}
