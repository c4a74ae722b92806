//! Butson-type Hadamard matrices in phase form.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CoeffInt, CycInt};
use crate::error::{Error, Result};
use crate::polymatrix::PolyMatrix;

/// Largest order for which [`are_equivalent`] runs its exhaustive search.
pub const EQUIVALENCE_BOUND: usize = 5;

/// An `N×N` table over `Z_q`; the matrix is `[ω^{phases[i][j]}]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhaseMatrix {
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub phases: Vec<Vec<usize>>,
}

impl PhaseMatrix {
    pub fn new(q: usize, phases: Vec<Vec<usize>>) -> Result<Self> {
        let n = phases.len();
        if q == 0 || n == 0 || phases.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("phase matrix must be square and non-empty".into()));
        }
        if let Some(&bad) = phases.iter().flatten().find(|&&v| v >= q) {
            return Err(Error::InvalidPhase { phase: bad as i64, q });
        }
        Ok(PhaseMatrix { q, n, phases })
    }

    /// Re-checks the invariants after deserialization.
    pub fn validated(self) -> Result<Self> {
        let n = self.n;
        let out = Self::new(self.q, self.phases)?;
        if out.n != n {
            return Err(Error::ShapeMismatch(format!("declared N={n}, table has {} rows", out.n)));
        }
        Ok(out)
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.phases[i][j]
    }

    /// Exact row orthogonality: `Σ_j ω^{P[r][j] - P[s][j]} = N δ_{r,s}`.
    pub fn is_bh(&self) -> bool {
        let q = self.q;
        (0..self.n).tuple_combinations().all(|(r, s)| {
            let mut counts = vec![0i64; q];
            for j in 0..self.n {
                counts[(self.phases[r][j] + q - self.phases[s][j]) % q] += 1;
            }
            crate::cyclotomic::from_phase_counts::<i64>(q, &counts)
                .map(|c| c.is_zero())
                .unwrap_or(false)
        })
    }

    fn dephase_unchecked(&self) -> Self {
        let q = self.q;
        let p = &self.phases;
        let phases = (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| (p[i][j] + p[0][0] + 2 * q - p[i][0] - p[0][j]) % q)
                    .collect()
            })
            .collect();
        PhaseMatrix { q, n: self.n, phases }
    }

    /// Normalizes the first row and column to zero.
    pub fn dephase(&self) -> Result<Self> {
        if !self.is_bh() {
            return Err(Error::NotBh);
        }
        Ok(self.dephase_unchecked())
    }

    pub fn transpose(&self) -> Self {
        let phases = (0..self.n).map(|i| (0..self.n).map(|j| self.phases[j][i]).collect()).collect();
        PhaseMatrix { q: self.q, n: self.n, phases }
    }

    /// `P[rows[i]][cols[j]]`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        let phases = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| self.phases[r][c]).collect())
            .collect();
        PhaseMatrix { q: self.q, n: self.n, phases }
    }

    /// Lexicographic minimum of the dephased forms of all row/column
    /// permutations; a complete invariant of the equivalence class.
    pub fn canonical_form(&self) -> Result<Self> {
        if self.n > EQUIVALENCE_BOUND {
            return Err(Error::Unsupported(format!(
                "equivalence search is bounded to N <= {EQUIVALENCE_BOUND}"
            )));
        }
        if !self.is_bh() {
            return Err(Error::NotBh);
        }
        let perms: Vec<Vec<usize>> = (0..self.n).permutations(self.n).collect();
        let best = perms
            .par_iter()
            .map(|rows| {
                perms
                    .iter()
                    .map(|cols| self.permuted(rows, cols).dephase_unchecked().phases)
                    .min()
                    .expect("at least one permutation")
            })
            .min()
            .expect("at least one permutation");
        Ok(PhaseMatrix { q: self.q, n: self.n, phases: best })
    }

    /// A random member of the same class: permuted rows and columns with
    /// random diagonal phases on both sides.
    pub fn random_equivalent(&self, rng: &mut impl Rng) -> Self {
        let mut rows: Vec<usize> = (0..self.n).collect();
        let mut cols = rows.clone();
        rows.shuffle(rng);
        cols.shuffle(rng);
        let a: Vec<usize> = (0..self.n).map(|_| rng.gen_range(0..self.q)).collect();
        let b: Vec<usize> = (0..self.n).map(|_| rng.gen_range(0..self.q)).collect();
        let mut out = self.permuted(&rows, &cols);
        for i in 0..self.n {
            for j in 0..self.n {
                out.phases[i][j] = (out.phases[i][j] + a[i] + b[j]) % self.q;
            }
        }
        out
    }

    /// The constant polynomial matrix in `m` variables.
    pub fn to_polymatrix<T: CoeffInt>(&self, m: usize) -> PolyMatrix<T> {
        PolyMatrix::from_phases(self.q, m, &self.phases).expect("phases are in range")
    }

    pub fn to_cyc_matrix<T: CoeffInt>(&self) -> Vec<Vec<CycInt<T>>> {
        self.phases
            .iter()
            .map(|r| r.iter().map(|&s| CycInt::root(self.q, s).expect("in range")).collect())
            .collect()
    }
}

/// Equivalence under row/column permutations and diagonal phase scaling.
pub fn are_equivalent(a: &PhaseMatrix, b: &PhaseMatrix) -> Result<bool> {
    if a.q != b.q || a.n != b.n {
        return Err(Error::ShapeMismatch(format!(
            "(q,N) = ({},{}) vs ({},{})",
            a.q, a.n, b.q, b.n
        )));
    }
    Ok(a.canonical_form()? == b.canonical_form()?)
}

/// `phases[i][j] = (q/N)·i·j mod q`.
pub fn fourier_phase(q: usize, n: usize) -> Result<PhaseMatrix> {
    if n == 0 || q % n != 0 {
        return Err(Error::Domain(format!("Fourier matrix needs N | q (q={q}, N={n})")));
    }
    let step = q / n;
    PhaseMatrix::new(q, (0..n).map(|i| (0..n).map(|j| step * i * j % q).collect()).collect())
}

/// n-fold Kronecker power of `[[0,0],[0,q/2]]`.
pub fn walsh_kron_phase(q: usize, n: usize) -> Result<PhaseMatrix> {
    if q % 2 != 0 {
        return Err(Error::Domain(format!("Walsh phases need even q (q={q})")));
    }
    let size = 1usize << n;
    let half = q / 2;
    PhaseMatrix::new(
        q,
        (0..size)
            .map(|i| (0..size).map(|j| half * ((i & j).count_ones() as usize % 2)).collect())
            .collect(),
    )
}

/// Built-in class representatives of `H(q, N)`.
pub fn catalog(q: usize, n: usize) -> Result<Vec<PhaseMatrix>> {
    match (q, n) {
        (q, 2) if q % 2 == 0 => Ok(vec![walsh_kron_phase(q, 1)?]),
        (q, 2) if q % 2 == 1 => Err(Error::NoBhMatrices { q, n }),
        (3, 3) => Ok(vec![fourier_phase(3, 3)?]),
        (2, 4) => Ok(vec![walsh_kron_phase(2, 2)?]),
        (4, 4) => Ok(vec![walsh_kron_phase(4, 2)?, fourier_phase(4, 4)?]),
        _ => Err(Error::Uncataloged { q, n }),
    }
}
