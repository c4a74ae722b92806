//! Generalized seed PU matrices of order `2^n` over Boolean variables, where
//! each delay `D(z_k)` of order `2^n` becomes a Kronecker product of order-2
//! delays in `n` fresh variables.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{CoeffInt, CycInt};
use crate::error::{Error, Result};
use crate::functions::{validate_permutation, QArray};
use crate::hadamard::PhaseMatrix;
use crate::polymatrix::{FunctionMatrix, PolyMatrix};
use crate::seedpu::{function_matrix_from_general, linear_parts, seed_function_matrix, sq_from_catalog, GeneralForm, QuadraticTerm, SeedSpec};

/// BH factors of order `2^n`; `m = hs.len() - 1` delay blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSeedSpec {
    pub q: usize,
    pub n: usize,
    pub hs: Vec<PhaseMatrix>,
}

impl GenSeedSpec {
    pub fn new(n: usize, hs: Vec<PhaseMatrix>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("block width n must be at least 1".into()));
        }
        let seed = SeedSpec::new(hs)?;
        if seed.n != 1 << n {
            return Err(Error::ShapeMismatch(format!("BH order {} is not 2^{n}", seed.n)));
        }
        Ok(GenSeedSpec { q: seed.q, n, hs: seed.hs })
    }

    pub fn m(&self) -> usize {
        self.hs.len() - 1
    }

    pub fn order(&self) -> usize {
        1 << self.n
    }

    pub fn num_vars(&self) -> usize {
        self.m() * self.n
    }

    fn as_seed(&self) -> SeedSpec {
        SeedSpec { q: self.q, n: self.order(), hs: self.hs.clone() }
    }
}

/// `D(z_{kn+n-1}) ⊗ … ⊗ D(z_{kn})` inside a `total`-variable layout; diagonal
/// entry `y` is `Π_v z_{kn+v}^{bit_v(y)}`.
pub fn generalized_delay<T: CoeffInt>(q: usize, n: usize, total: usize, k: usize) -> Result<PolyMatrix<T>> {
    if n == 0 || (k + 1) * n > total {
        return Err(Error::Domain(format!("block {k} of width {n} does not fit in {total} variables")));
    }
    block_delay(q, &(k * n..(k + 1) * n).collect::<Vec<_>>(), total)
}

/// Delay of order `2^{vars.len()}` whose entry `y` is `Π_v z_{vars[v]}^{bit_v(y)}`.
pub fn block_delay<T: CoeffInt>(q: usize, vars: &[usize], total: usize) -> Result<PolyMatrix<T>> {
    if vars.is_empty() || vars.iter().any(|&v| v >= total) || vars.iter().collect::<BTreeSet<_>>().len() != vars.len() {
        return Err(Error::Domain(format!("delay block {vars:?} is not a set of distinct variables below {total}")));
    }
    let order = 1 << vars.len();
    let mut out = PolyMatrix::zero(q, order, total);
    for y in 0..order {
        let mut e = vec![0; total];
        for (v, &var) in vars.iter().enumerate() {
            e[var] = y >> v & 1;
        }
        let mut mat = vec![vec![CycInt::zero(q); order]; order];
        mat[y][y] = CycInt::one(q);
        out.add_term(e, mat)?;
    }
    Ok(out)
}

pub fn build_generalized_seed<T: CoeffInt>(spec: &GenSeedSpec) -> Result<PolyMatrix<T>> {
    let (m, total) = (spec.m(), spec.num_vars());
    let mut factors = Vec::with_capacity(2 * m + 1);
    for k in 0..m {
        factors.push(spec.hs[k].to_polymatrix(total));
        factors.push(generalized_delay(spec.q, spec.n, total, k)?);
    }
    factors.push(spec.hs[m].to_polymatrix(total));
    PolyMatrix::product(&factors)
}

/// Reads an array over `Z_{2^n}^m` as a Boolean array over `Z_2^{mn}`,
/// `y_k = Σ_v x_{kn+v} 2^v`.
pub fn to_boolean(f: &QArray) -> Result<QArray> {
    let (_, p, m) = f.shape();
    if !p.is_power_of_two() || p < 2 {
        return Err(Error::Unsupported(format!("alphabet size {p} is not a power of two")));
    }
    f.evaluate_to_sequence().reshape(2, m * p.trailing_zeros() as usize)
}

pub fn grid_to_boolean(grid: &FunctionMatrix) -> Result<FunctionMatrix> {
    let entries = grid
        .entries
        .iter()
        .map(|row| row.iter().map(to_boolean).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    FunctionMatrix::new(entries)
}

/// Function matrix of a generalized seed, over `Z_2^{mn}`.
pub fn generalized_seed_function_matrix(spec: &GenSeedSpec) -> Result<FunctionMatrix> {
    grid_to_boolean(&seed_function_matrix(&spec.as_seed()))
}

/// A complete complementary code together with its first column.
#[derive(Clone, Debug)]
pub struct Theorem7Family {
    pub ccc: FunctionMatrix,
    pub css: Vec<QArray>,
}

/// Permutes the Boolean variables of an order-`2^n` grid (given over
/// `Z_{2^n}^m`) by `π` on `{0, …, mn-1}`.
pub fn theorem7_families(grid: &FunctionMatrix, pi: &[usize]) -> Result<Theorem7Family> {
    let boolean = grid_to_boolean(grid)?;
    validate_permutation(pi, boolean.m)?;
    let ccc = boolean.permute_vars(pi)?;
    let css = (0..ccc.n).map(|i| ccc.get(i, 0).clone()).collect();
    Ok(Theorem7Family { ccc, css })
}

/// [`theorem7_families`] for the grid `f + h(i, y_0) + h'(y_{m-1}, j)`.
pub fn theorem7_from_general(form: &GeneralForm, h: &QuadraticTerm, h_end: &QuadraticTerm, pi: &[usize]) -> Result<Theorem7Family> {
    theorem7_families(&function_matrix_from_general(&form.assemble(), h, h_end)?, pi)
}

/// A random member of `π·S(q, 2^n)` in Boolean form over `Z_2^{mn}`.
pub fn sample_s_prime(q: usize, n: usize, m: usize, pi: &[usize], rng: &mut impl Rng) -> Result<QArray> {
    let order = 1 << n;
    let sq = sq_from_catalog(q, order)?;
    let hs = (1..m).map(|_| sq[rng.gen_range(0..sq.len())].clone()).collect();
    let linear = (0..m).map(|_| (1..order).map(|_| rng.gen_range(0..q)).collect()).collect();
    let f = GeneralForm::new(q, order, m, hs, linear, rng.gen_range(0..q))?.assemble();
    to_boolean(&f)?.permute_vars(pi)
}

/// A random permutation of `len` symbols.
pub fn random_permutation(len: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut pi: Vec<usize> = (0..len).collect();
    pi.shuffle(rng);
    pi
}

fn check_boolean_pi(f: &QArray, pi: &[usize]) -> Result<()> {
    if f.p() != 2 || f.m() < 2 {
        return Err(Error::ShapeMismatch("expected a Boolean array with at least two variables".into()));
    }
    validate_permutation(pi, f.m())
}

/// `{f, f + (q/2)x_{π(0)}, f + (q/2)x_{π(1)}, f + (q/2)(x_{π(0)} + x_{π(1)})}`.
pub fn construction5_cosets(f: &QArray, pi: &[usize]) -> Result<Vec<QArray>> {
    check_boolean_pi(f, pi)?;
    let q = f.q();
    if q % 2 != 0 {
        return Err(Error::InvalidParameters("construction 5 needs even q".into()));
    }
    let half = (q / 2) as i64;
    let (x, y) = (pi[0], pi[1]);
    let m = f.m();
    Ok((0..4)
        .map(|i| {
            QArray::from_fn(q, 2, m, |v| {
                (f.get(v) as i64) + half * ((i & 1) * v[x] + (i >> 1) * v[y]) as i64
            })
        })
        .collect())
}

/// Offset tables `[(c_x, c_y, c_xy)]` of the three quaternary diagonal sets.
pub fn construction6_offsets(variant: u8) -> Result<[(i64, i64, i64); 4]> {
    match variant {
        1 => Ok([(0, 0, 0), (2, 0, 0), (0, 2, 0), (2, 2, 0)]),
        2 => Ok([(0, 0, 0), (2, 1, 0), (0, 2, 0), (2, 3, 0)]),
        3 => Ok([(0, 0, 0), (3, 1, 2), (2, 2, 0), (1, 3, 2)]),
        _ => Err(Error::InvalidParameters(format!("construction 6 variant {variant} is not 1, 2 or 3"))),
    }
}

/// `f` plus each offset `c_x x + c_y y + c_xy xy` at `(x, y) = (x_{π(0)}, x_{π(1)})`.
pub fn construction6_cosets(f: &QArray, variant: u8, pi: &[usize]) -> Result<Vec<QArray>> {
    check_boolean_pi(f, pi)?;
    if f.q() != 4 {
        return Err(Error::InvalidParameters("construction 6 needs q = 4".into()));
    }
    let offsets = construction6_offsets(variant)?;
    let (x, y) = (pi[0], pi[1]);
    Ok(offsets
        .iter()
        .map(|&(cx, cy, cxy)| {
            QArray::from_fn(4, 2, f.m(), |v| {
                let (a, b) = (v[x] as i64, v[y] as i64);
                f.get(v) as i64 + cx * a + cy * b + cxy * a * b
            })
        })
        .collect())
}

/// All distinct Boolean sequences `π·f` for `f ∈ S(q, 2^n)` and every
/// permutation `π` of the `mn` Boolean variables.
pub fn count_theorem7_family(q: usize, n: usize, m: usize, guard: u128) -> Result<usize> {
    let order = 1 << n;
    let sq = sq_from_catalog(q, order)?;
    let total = m * n;
    let perms: u128 = (1..=total as u128).product();
    let needed = perms
        .saturating_mul((sq.len() as u128).saturating_pow(m.saturating_sub(1) as u32))
        .saturating_mul((q as u128).saturating_pow((order * m - m + 1) as u32));
    if needed > guard {
        return Err(Error::GuardExceeded { needed, guard });
    }
    let linear = linear_parts(q, order, m);
    let mut seen = BTreeSet::new();
    for terms in itertools::Itertools::multi_cartesian_product((1..m).map(|_| 0..sq.len())) {
        let hs = terms.iter().map(|&t| sq[t].clone()).collect();
        let base = GeneralForm::quadratic_only(q, order, hs)?.assemble();
        for l in &linear {
            let b = to_boolean(&base.add(l)?)?;
            for pi in itertools::Itertools::permutations(0..total, total) {
                seen.insert(b.permute_vars(&pi)?.table().to_vec());
            }
        }
    }
    Ok(seen.len())
}

/// Removes repeated arrays, keeping first occurrences.
pub fn dedup_arrays(arrays: Vec<QArray>) -> Vec<QArray> {
    let mut seen = BTreeSet::new();
    arrays.into_iter().filter(|a| seen.insert(a.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{is_cas, QSequence};
    use crate::hadamard::{catalog, walsh_kron_phase};
    use crate::seedpu::{build_seed, psi};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn delay_examples() {
        let d1 = generalized_delay::<i64>(2, 1, 1, 0).unwrap();
        assert_eq!(d1, PolyMatrix::delay(2, 2, 1, 0).unwrap());
        let d2 = generalized_delay::<i64>(2, 2, 2, 0).unwrap();
        let z0 = PolyMatrix::<i64>::delay(2, 2, 2, 0).unwrap();
        let z1 = PolyMatrix::<i64>::delay(2, 2, 2, 1).unwrap();
        assert_eq!(d2, z1.kronecker(&z0).unwrap());
        assert_eq!(d2.coefficient(&[1, 0])[1][1], CycInt::one(2));
        assert_eq!(d2.coefficient(&[0, 1])[2][2], CycInt::one(2));
        let d3 = generalized_delay::<i64>(2, 3, 3, 0).unwrap();
        assert_eq!(d3.coefficient(&[1, 0, 1])[5][5], CycInt::one(2));
        assert!(generalized_delay::<i64>(2, 2, 3, 1).is_err());
    }

    #[test]
    fn width_one_matches_plain_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for q in [2, 4, 6] {
            let seed = SeedSpec::random(q, 2, 3, &mut rng).unwrap();
            let gen = GenSeedSpec::new(1, seed.hs.clone()).unwrap();
            assert_eq!(build_generalized_seed::<i64>(&gen).unwrap(), build_seed::<i64>(&seed).unwrap());
        }
    }

    #[test]
    fn walsh_kron_seed_is_pu() {
        let w = walsh_kron_phase(2, 2).unwrap();
        let spec = GenSeedSpec::new(2, vec![w.clone(), w]).unwrap();
        let m = build_generalized_seed::<i64>(&spec).unwrap();
        assert_eq!(m.is_paraunitary().unwrap().as_integer(), Some(16));
    }

    #[test]
    fn generalized_seeds_are_desired_pu() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (q, m) in [(2, 1), (2, 2), (4, 1), (4, 2)] {
            let reps = catalog(q, 4).unwrap();
            let hs = (0..=m).map(|_| reps[rng.gen_range(0..reps.len())].random_equivalent(&mut rng)).collect();
            let spec = GenSeedSpec::new(2, hs).unwrap();
            let built = build_generalized_seed::<i64>(&spec).unwrap();
            assert_eq!(built.is_paraunitary().unwrap().as_integer(), Some(4i64.pow(m as u32 + 1)));
            let fm = built.extract_function_matrix(2).unwrap();
            assert_eq!(fm, generalized_seed_function_matrix(&spec).unwrap());
            assert!(fm.is_ccc().unwrap());
        }
    }

    #[test]
    fn univariate_restriction_stays_pu() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let reps = catalog(4, 4).unwrap();
        let hs = (0..3).map(|_| reps[rng.gen_range(0..2)].random_equivalent(&mut rng)).collect();
        let spec = GenSeedSpec::new(2, hs).unwrap();
        let built = build_generalized_seed::<i64>(&spec).unwrap();
        let pi = random_permutation(4, &mut rng);
        let powers: Vec<usize> = pi.iter().map(|&p| 1 << p).collect();
        let uni = built.substitute_univariate(&powers).unwrap();
        assert_eq!(uni.is_paraunitary().unwrap().as_integer(), Some(64));
        // Coefficient of Z^t is the coefficient of the Boolean point whose
        // permuted binary expansion is t.
        let fm = built.extract_function_matrix(2).unwrap();
        let seq = uni.extract_function_matrix(16).unwrap();
        for t in 0..16 {
            let x: Vec<usize> = pi.iter().map(|&p| t >> p & 1).collect();
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(seq.get(i, j).table()[t], fm.get(i, j).get(&x));
                }
            }
        }
    }

    #[test]
    fn theorem7_mixing_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sq = sq_from_catalog(2, 4).unwrap();
        let form = GeneralForm::quadratic_only(2, 4, vec![sq[2].clone()]).unwrap();
        let h = QuadraticTerm::new(2, catalog(2, 4).unwrap()[0].phases.clone()).unwrap();
        let id = theorem7_from_general(&form, &h, &h, &[0, 1, 2, 3]).unwrap();
        let plain = grid_to_boolean(&function_matrix_from_general(&form.assemble(), &h, &h).unwrap()).unwrap();
        assert_eq!(id.ccc, plain);
        let fam = theorem7_from_general(&form, &h, &h, &[1, 2, 3, 0]).unwrap();
        let seqs: Vec<QSequence> = fam.css.iter().map(QArray::evaluate_to_sequence).collect();
        assert!(crate::functions::is_css(&seqs).unwrap());
        assert!(fam.ccc.is_ccc().unwrap());
        for _ in 0..4 {
            let pi = random_permutation(4, &mut rng);
            assert!(theorem7_from_general(&form, &h, &h, &pi).unwrap().ccc.is_ccc().unwrap());
        }
        assert!(theorem7_from_general(&form, &h, &h, &[0, 1, 2]).is_err());
    }

    #[test]
    fn construction5_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for (q, m) in [(2, 2), (2, 3), (4, 2)] {
            for _ in 0..3 {
                let pi = random_permutation(2 * m, &mut rng);
                let f = sample_s_prime(q, 2, m, &pi, &mut rng).unwrap();
                assert!(is_cas(&construction5_cosets(&f, &pi).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn construction6_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for variant in 1..=3 {
            for _ in 0..3 {
                let pi = random_permutation(4, &mut rng);
                let f = sample_s_prime(4, 2, 2, &pi, &mut rng).unwrap();
                assert!(is_cas(&construction6_cosets(&f, variant, &pi).unwrap()).unwrap(), "variant {variant}");
            }
        }
        let f1 = to_boolean(&psi(5, 1).unwrap().to_array()).unwrap();
        assert!(is_cas(&construction6_cosets(&f1, 3, &[0, 1, 2, 3]).unwrap()).unwrap());
        let zero = QArray::constant(4, 2, 2, 0);
        let set = construction6_cosets(&zero, 1, &[0, 1]).unwrap();
        assert_eq!(set[3].anf_string().unwrap(), "2x0 + 2x1");
        assert!(is_cas(&set).unwrap());
        assert!(construction6_cosets(&zero, 4, &[0, 1]).is_err());
    }

    /// The diagonal as printed in the first quaternary list swaps the roles
    /// of the two variables relative to the third list; both work.
    #[test]
    fn construction6_swapped_listing_also_works() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..4 {
            let pi = random_permutation(4, &mut rng);
            let f = sample_s_prime(4, 2, 2, &pi, &mut rng).unwrap();
            let swapped = [pi[1], pi[0], pi[2], pi[3]];
            assert!(is_cas(&construction6_cosets(&f, 3, &swapped).unwrap()).unwrap());
        }
    }

    #[test]
    fn permutations_enlarge_the_family() {
        let with_perms = count_theorem7_family(2, 2, 2, 10_000_000).unwrap();
        let plain = crate::seedpu::enumerate_s(2, 4, 2, 10_000_000).unwrap().sequences.len();
        assert_eq!(plain, 768);
        assert!(with_perms > plain);
        let dd = dedup_arrays(vec![QArray::constant(2, 2, 1, 0), QArray::constant(2, 2, 1, 1), QArray::constant(2, 2, 1, 0)]);
        assert_eq!(dd.len(), 2);
    }
}
