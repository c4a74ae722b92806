//! Block compositions of desired PU matrices over Boolean variables: the
//! `A·D·B` product, the interleaved block-diagonal constructions and their
//! closed-form function matrices.
//!
//! Every operand lives in one shared variable layout of `total` Boolean
//! variables; sub-matrices are embedded by the caller (see
//! [`PolyMatrix::embed`]) and each construction checks that the declared
//! variable blocks are disjoint.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CoeffInt;
use crate::error::{Error, Result};
use crate::functions::{validate_permutation, QArray};
use crate::genseed::{block_delay, build_generalized_seed, GenSeedSpec};
use crate::hadamard::{catalog, walsh_kron_phase, PhaseMatrix};
use crate::polymatrix::{FunctionMatrix, PolyMatrix};

/// `Σ_v x[vars[v]]·2^v`.
pub fn block_index(x: &[usize], vars: &[usize]) -> usize {
    vars.iter().enumerate().map(|(v, &k)| x[k] << v).sum()
}

/// Column targets of the interleaving permutation of order `2^{n+n'}`:
/// `u -> v` with `v ≡ 2^{n'}·u mod (2^{n+n'} - 1)` and the last index fixed.
pub fn interleave_perm(n: usize, n_prime: usize) -> Vec<usize> {
    let order = 1usize << (n + n_prime);
    (0..order)
        .map(|u| if u == order - 1 { u } else { (u << n_prime) % (order - 1) })
        .collect()
}

pub fn interleave_p<T: CoeffInt>(q: usize, n: usize, n_prime: usize, total: usize) -> Result<PolyMatrix<T>> {
    if n == 0 || n_prime == 0 {
        return Err(Error::Domain("interleaving needs n, n' >= 1".into()));
    }
    PolyMatrix::permutation(q, total, &interleave_perm(n, n_prime))
}

/// Variables with a nonzero exponent somewhere in `m`.
pub fn variables_used<T: CoeffInt>(m: &PolyMatrix<T>) -> BTreeSet<usize> {
    m.support()
        .flat_map(|e| e.iter().enumerate().filter(|(_, &d)| d > 0).map(|(k, _)| k))
        .collect()
}

fn ensure_disjoint(blocks: &[(&str, BTreeSet<usize>)]) -> Result<()> {
    for (a, (na, va)) in blocks.iter().enumerate() {
        for (nb, vb) in &blocks[a + 1..] {
            if let Some(v) = va.intersection(vb).next() {
                return Err(Error::ShapeMismatch(format!("variable {v} is shared by {na} and {nb}")));
            }
        }
    }
    Ok(())
}

fn ensure_order<T: CoeffInt>(what: &str, m: &PolyMatrix<T>, q: usize, order: usize, total: usize) -> Result<()> {
    if m.q() != q || m.order() != order || m.num_vars() != total {
        return Err(Error::ShapeMismatch(format!(
            "{what}: expected order {order} over Z_{q} in {total} variables, got order {} over Z_{} in {}",
            m.order(),
            m.q(),
            m.num_vars()
        )));
    }
    Ok(())
}

fn ensure_fm(what: &str, fm: &FunctionMatrix, q: usize, order: usize, total: usize) -> Result<()> {
    if fm.q != q || fm.n != order || fm.p != 2 || fm.m != total {
        return Err(Error::ShapeMismatch(format!("{what}: expected {order}×{order} Boolean functions over Z_{q} in {total} variables")));
    }
    Ok(())
}

fn grid(q: usize, order: usize, total: usize, mut f: impl FnMut(usize, usize, &[usize]) -> usize) -> FunctionMatrix {
    let entries = (0..order)
        .map(|u| (0..order).map(|v| QArray::from_fn(q, 2, total, |x| f(u, v, x) as i64)).collect())
        .collect();
    FunctionMatrix::new(entries).expect("uniform shape")
}

/// `A(z1)·D(z0)·B(z2)` with `D` the delay on the `x0` block.
pub fn compose_adb<T: CoeffInt>(a: &PolyMatrix<T>, b: &PolyMatrix<T>, x0: &[usize]) -> Result<PolyMatrix<T>> {
    let (q, total, order) = (a.q(), a.num_vars(), 1 << x0.len());
    ensure_order("A", a, q, order, total)?;
    ensure_order("B", b, q, order, total)?;
    ensure_disjoint(&[("A", variables_used(a)), ("B", variables_used(b)), ("x0", x0.iter().copied().collect())])?;
    PolyMatrix::product(&[a.clone(), block_delay(q, x0, total)?, b.clone()])
}

/// `c_{r,s} = Σ_i (a_{r,i} + b_{i,s})·g_i(x0)`.
pub fn adb_functions(a: &FunctionMatrix, b: &FunctionMatrix, x0: &[usize]) -> Result<FunctionMatrix> {
    let (q, total, order) = (a.q, a.m, 1 << x0.len());
    ensure_fm("A", a, q, order, total)?;
    ensure_fm("B", b, q, order, total)?;
    Ok(grid(q, order, total, |r, s, x| {
        let i = block_index(x, x0);
        a.get(r, i).get(x) + b.get(i, s).get(x)
    }))
}

/// Order-2 seed `W·D(z_{π(0)})·W·…·D(z_{π(m-1)})·W` twisted by a linear
/// part supported on the path and a constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order2Seed {
    pub path: Vec<usize>,
    /// Per-variable linear coefficients over the whole layout; empty means zero.
    #[serde(default)]
    pub linear: Vec<i64>,
    #[serde(default)]
    pub constant: i64,
}

impl Order2Seed {
    pub fn new(path: Vec<usize>, linear: Vec<i64>, constant: i64) -> Self {
        Order2Seed { path, linear, constant }
    }

    fn check(&self, q: usize, total: usize) -> Result<()> {
        if q % 2 != 0 {
            return Err(Error::InvalidParameters("order-2 seeds need even q".into()));
        }
        if self.path.is_empty() || self.path.iter().any(|&v| v >= total) || self.vars().len() != self.path.len() {
            return Err(Error::InvalidParameters(format!("path {:?} is not a nonempty set of distinct variables", self.path)));
        }
        if !self.linear.is_empty() {
            if self.linear.len() != total {
                return Err(Error::ShapeMismatch(format!("expected {total} linear coefficients")));
            }
            let off_path = (0..total).find(|k| !self.path.contains(k) && self.linear[*k].rem_euclid(q as i64) != 0);
            if let Some(k) = off_path {
                return Err(Error::InvalidParameters(format!("linear term on x{k} is off the seed path")));
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        self.path.iter().copied().collect()
    }

    pub fn build<T: CoeffInt>(&self, q: usize, total: usize) -> Result<PolyMatrix<T>> {
        self.check(q, total)?;
        let w = walsh_kron_phase(q, 1)?.to_polymatrix::<T>(total);
        let mut factors = vec![w.clone()];
        for &v in &self.path {
            factors.push(PolyMatrix::delay(q, 2, total, v)?);
            factors.push(w.clone());
        }
        let linear = if self.linear.is_empty() { vec![0; total] } else { self.linear.clone() };
        PolyMatrix::product(&factors)?.twist(&linear, self.constant)
    }

    /// `f + (q/2)(α x_{π(0)} + β x_{π(m-1)})` with
    /// `f = (q/2) Σ x_{π(k-1)} x_{π(k)} + Σ c_k x_k + c'`.
    pub fn entry(&self, q: usize, alpha: usize, beta: usize, x: &[usize]) -> usize {
        let p = &self.path;
        let quad: usize = p.windows(2).map(|w| x[w[0]] * x[w[1]]).sum::<usize>() + alpha * x[p[0]] + beta * x[p[p.len() - 1]];
        let lin: i64 = self.linear.iter().zip(x).map(|(&c, &v)| c * v as i64).sum::<i64>() + self.constant;
        ((q / 2) as i64 * quad as i64 + lin).rem_euclid(q as i64) as usize
    }

    pub fn function(&self, q: usize, alpha: usize, beta: usize, total: usize) -> QArray {
        QArray::from_fn(q, 2, total, |x| self.entry(q, alpha, beta, x) as i64)
    }

    pub fn function_matrix(&self, q: usize, total: usize) -> Result<FunctionMatrix> {
        self.check(q, total)?;
        Ok(grid(q, 2, total, |a, b, x| self.entry(q, a, b, x)))
    }
}

fn check_seeds(q: usize, n: usize, total: usize, us: &[Order2Seed]) -> Result<()> {
    if us.len() != 1 << n {
        return Err(Error::ShapeMismatch(format!("expected {} order-2 seeds", 1 << n)));
    }
    us.iter().try_for_each(|u| u.check(q, total))
}

fn seed_vars(us: &[Order2Seed]) -> BTreeSet<usize> {
    us.iter().flat_map(Order2Seed::vars).collect()
}

fn check_bh(hs: &[&PhaseMatrix], q: usize, order: usize) -> Result<()> {
    for h in hs {
        if h.q != q || h.n != order {
            return Err(Error::ShapeMismatch(format!("BH blocks must be of order {order} over Z_{q}")));
        }
        if !h.is_bh() {
            return Err(Error::NotBh);
        }
    }
    Ok(())
}

fn interleaved<T: CoeffInt>(left: &[PolyMatrix<T>], middle: &[PolyMatrix<T>], n: usize, n_prime: usize) -> Result<PolyMatrix<T>> {
    let (q, total) = (left[0].q(), left[0].num_vars());
    let p = interleave_p::<T>(q, n, n_prime, total)?;
    PolyMatrix::product(&[PolyMatrix::block_diag(left)?, p.clone(), PolyMatrix::block_diag(middle)?, p.transpose()])
}

/// `diag(H0, H1)·P·diag(U^0, …, U^{2^n-1})·Pᵀ` of order `2^{n+1}`.
pub fn theorem8_matrix<T: CoeffInt>(h0: &PhaseMatrix, h1: &PhaseMatrix, us: &[Order2Seed], total: usize) -> Result<PolyMatrix<T>> {
    let q = h0.q;
    let n = h0.n.trailing_zeros() as usize;
    check_bh(&[h0, h1], q, 1 << n)?;
    corollary7_matrix(&h0.to_polymatrix(total), &h1.to_polymatrix(total), us)
}

/// Entry `(α2^n + i, β2^n + j)` is `f^j + (q/2)(α x_{π_j(0)} + β x_{π_j(m-1)}) + H̃^α_{i,j}`.
pub fn theorem8_functions(h0: &PhaseMatrix, h1: &PhaseMatrix, us: &[Order2Seed], total: usize) -> Result<FunctionMatrix> {
    let q = h0.q;
    let n = h0.n.trailing_zeros() as usize;
    check_bh(&[h0, h1], q, 1 << n)?;
    check_seeds(q, n, total, us)?;
    let hs = [h0, h1];
    let mask = (1 << n) - 1;
    Ok(grid(q, 2 << n, total, |u, v, x| {
        let (alpha, i, beta, j) = (u >> n, u & mask, v >> n, v & mask);
        (us[j].entry(q, alpha, beta, x) + hs[alpha].get(i, j)) % q
    }))
}

/// [`theorem8_matrix`] with desired PU blocks `V^0, V^1` in place of the BH blocks.
pub fn corollary7_matrix<T: CoeffInt>(v0: &PolyMatrix<T>, v1: &PolyMatrix<T>, us: &[Order2Seed]) -> Result<PolyMatrix<T>> {
    let (q, total, order) = (v0.q(), v0.num_vars(), v0.order());
    if !order.is_power_of_two() || order < 2 {
        return Err(Error::ShapeMismatch(format!("block order {order} is not 2^n")));
    }
    let n = order.trailing_zeros() as usize;
    ensure_order("V^1", v1, q, order, total)?;
    check_seeds(q, n, total, us)?;
    let vvars: BTreeSet<usize> = variables_used(v0).union(&variables_used(v1)).copied().collect();
    ensure_disjoint(&[("V blocks", vvars), ("seeds", seed_vars(us))])?;
    let blocks = us.iter().map(|u| u.build(q, total)).collect::<Result<Vec<_>>>()?;
    interleaved(&[v0.clone(), v1.clone()], &blocks, n, 1)
}

/// Entry `(α2^n + i, β2^n + j)` is `Ṽ^α_{i,j} + f^j + (q/2)(α x_{π_j(0)} + β x_{π_j(m-1)})`.
pub fn corollary7_functions(v0: &FunctionMatrix, v1: &FunctionMatrix, us: &[Order2Seed]) -> Result<FunctionMatrix> {
    let (q, total, order) = (v0.q, v0.m, v0.n);
    let n = order.trailing_zeros() as usize;
    ensure_fm("V^0", v0, q, order, total)?;
    ensure_fm("V^1", v1, q, order, total)?;
    check_seeds(q, n, total, us)?;
    let vs = [v0, v1];
    let mask = order - 1;
    Ok(grid(q, 2 * order, total, |u, v, x| {
        let (alpha, i, beta, j) = (u >> n, u & mask, v >> n, v & mask);
        (vs[alpha].get(i, j).get(x) + us[j].entry(q, alpha, beta, x)) % q
    }))
}

/// `G·diag(D(z1), D(z1))·diag(H2, H3)` with `G` from [`theorem8_matrix`].
pub fn theorem9_matrix<T: CoeffInt>(
    h0: &PhaseMatrix,
    h1: &PhaseMatrix,
    us: &[Order2Seed],
    x1: &[usize],
    h2: &PhaseMatrix,
    h3: &PhaseMatrix,
    total: usize,
) -> Result<PolyMatrix<T>> {
    let q = h0.q;
    check_bh(&[h0, h1, h2, h3], q, 1 << x1.len())?;
    ensure_disjoint(&[("seeds", seed_vars(us)), ("x1", x1.iter().copied().collect())])?;
    let g = theorem8_matrix::<T>(h0, h1, us, total)?;
    let d = block_delay::<T>(q, x1, total)?;
    PolyMatrix::product(&[
        g,
        PolyMatrix::block_diag(&[d.clone(), d])?,
        PolyMatrix::block_diag(&[h2.to_polymatrix(total), h3.to_polymatrix(total)])?,
    ])
}

/// Entry `(α2^n + l, β2^n + j)` is
/// `Σ_i (f^i + (q/2)(α x_{π_i(0)} + β x_{π_i(m-1)}) + H̃^α_{l,i} + H̃^{β+2}_{i,j})·g_i(x1)`.
pub fn theorem9_functions(
    h0: &PhaseMatrix,
    h1: &PhaseMatrix,
    us: &[Order2Seed],
    x1: &[usize],
    h2: &PhaseMatrix,
    h3: &PhaseMatrix,
    total: usize,
) -> Result<FunctionMatrix> {
    let q = h0.q;
    let n = x1.len();
    check_bh(&[h0, h1, h2, h3], q, 1 << n)?;
    check_seeds(q, n, total, us)?;
    let hs = [h0, h1, h2, h3];
    let mask = (1 << n) - 1;
    Ok(grid(q, 2 << n, total, |u, v, x| {
        let (alpha, l, beta, j) = (u >> n, u & mask, v >> n, v & mask);
        let i = block_index(x, x1);
        (us[i].entry(q, alpha, beta, x) + hs[alpha].get(l, i) + hs[beta + 2].get(i, j)) % q
    }))
}

/// `diag(V^0, …, V^{2^{n'}-1})·P·diag(U^0, …, U^{2^n-1})·Pᵀ` of order
/// `2^{n+n'}`; `U^j` has order `2^{n'}`, `V^α` has order `2^n`.
pub fn theorem10_matrix<T: CoeffInt>(us: &[PolyMatrix<T>], vs: &[PolyMatrix<T>]) -> Result<PolyMatrix<T>> {
    let (n, n_prime) = check_theorem10(us, vs)?;
    interleaved(vs, us, n, n_prime)
}

fn check_theorem10<T: CoeffInt>(us: &[PolyMatrix<T>], vs: &[PolyMatrix<T>]) -> Result<(usize, usize)> {
    let (Some(u0), Some(v0)) = (us.first(), vs.first()) else {
        return Err(Error::ShapeMismatch("need at least one U and one V block".into()));
    };
    let (n, n_prime) = (us.len().trailing_zeros() as usize, vs.len().trailing_zeros() as usize);
    if !us.len().is_power_of_two() || !vs.len().is_power_of_two() || u0.order() != vs.len() || v0.order() != us.len() || n == 0 || n_prime == 0 {
        return Err(Error::ShapeMismatch("need 2^n blocks U of order 2^{n'} and 2^{n'} blocks V of order 2^n".into()));
    }
    let (q, total) = (u0.q(), u0.num_vars());
    us.iter().try_for_each(|u| ensure_order("U", u, q, 1 << n_prime, total))?;
    vs.iter().try_for_each(|v| ensure_order("V", v, q, 1 << n, total))?;
    let uvars = us.iter().flat_map(variables_used).collect();
    let vvars = vs.iter().flat_map(variables_used).collect();
    ensure_disjoint(&[("U blocks", uvars), ("V blocks", vvars)])?;
    Ok((n, n_prime))
}

/// Entry `(α2^n + i, β2^n + j)` is `Ũ^j_{α,β} + Ṽ^α_{i,j}`.
pub fn theorem10_functions(us: &[FunctionMatrix], vs: &[FunctionMatrix]) -> Result<FunctionMatrix> {
    let (q, total) = (us[0].q, us[0].m);
    let n = us.len().trailing_zeros() as usize;
    us.iter().try_for_each(|u| ensure_fm("U", u, q, vs.len(), total))?;
    vs.iter().try_for_each(|v| ensure_fm("V", v, q, us.len(), total))?;
    let mask = us.len() - 1;
    Ok(grid(q, us.len() * vs.len(), total, |u, v, x| {
        let (alpha, i, beta, j) = (u >> n, u & mask, v >> n, v & mask);
        (us[j].get(alpha, beta).get(x) + vs[alpha].get(i, j).get(x)) % q
    }))
}

/// `V(z1)·diag(D(z0), …)·diag(U^0(z2), …, U^{2^{n'}-1}(z2))`; `V` has order
/// `2^{n+n'}`, each `U^β` order `2^n`, `D` is the delay on the `x0` block.
pub fn theorem11_matrix<T: CoeffInt>(v: &PolyMatrix<T>, us: &[PolyMatrix<T>], x0: &[usize]) -> Result<PolyMatrix<T>> {
    let (q, total) = (v.q(), v.num_vars());
    let order = 1 << x0.len();
    if us.is_empty() || !us.len().is_power_of_two() || v.order() != order * us.len() {
        return Err(Error::ShapeMismatch("V must have order 2^n times the number of U blocks".into()));
    }
    us.iter().try_for_each(|u| ensure_order("U", u, q, order, total))?;
    let uvars = us.iter().flat_map(variables_used).collect();
    ensure_disjoint(&[("V", variables_used(v)), ("U blocks", uvars), ("x0", x0.iter().copied().collect())])?;
    let d = block_delay::<T>(q, x0, total)?;
    PolyMatrix::product(&[v.clone(), PolyMatrix::block_diag(&vec![d; us.len()])?, PolyMatrix::block_diag(us)?])
}

/// Entry `(u, β2^n + j)` is `Σ_i (Ṽ_{u, β2^n+i} + Ũ^β_{i,j})·g_i(x0)`.
pub fn theorem11_functions(v: &FunctionMatrix, us: &[FunctionMatrix], x0: &[usize]) -> Result<FunctionMatrix> {
    let (q, total) = (v.q, v.m);
    let n = x0.len();
    ensure_fm("V", v, q, us.len() << n, total)?;
    us.iter().try_for_each(|u| ensure_fm("U", u, q, 1 << n, total))?;
    let mask = (1 << n) - 1;
    Ok(grid(q, v.n, total, |u, col, x| {
        let (beta, j) = (col >> n, col & mask);
        let i = block_index(x, x0);
        (v.get(u, (beta << n) + i).get(x) + us[beta].get(i, j).get(x)) % q
    }))
}

/// Function matrix of a desired PU matrix that only involves the variables
/// in `vars`, lifted to the full layout of `total` variables.
pub fn functions_on<T: CoeffInt>(m: &PolyMatrix<T>, vars: &[usize]) -> Result<FunctionMatrix> {
    let total = m.num_vars();
    if let Some(v) = variables_used(m).into_iter().find(|v| !vars.contains(v)) {
        return Err(Error::ShapeMismatch(format!("variable {v} is outside the block {vars:?}")));
    }
    let mut local = PolyMatrix::zero(m.q(), m.order(), vars.len());
    for (e, mat) in m.terms() {
        local.add_term(vars.iter().map(|&v| e[v]).collect(), mat.clone())?;
    }
    let fm = local.extract_function_matrix(2)?;
    let entries = fm
        .entries
        .iter()
        .map(|row| row.iter().map(|f| f.lift(total, vars)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    FunctionMatrix::new(entries)
}

/// A random desired PU matrix of order `2^n` in the variables `vars`
/// (a generalized seed with `vars.len() / n` delay blocks, or a constant BH
/// matrix when `vars` is empty).
pub fn random_desired_pu<T: CoeffInt>(q: usize, n: usize, vars: &[usize], total: usize, rng: &mut impl Rng) -> Result<PolyMatrix<T>> {
    if n == 0 || vars.len() % n != 0 {
        return Err(Error::InvalidParameters(format!("{} variables do not split into blocks of {n}", vars.len())));
    }
    let reps = catalog(q, 1 << n)?;
    let m = vars.len() / n;
    let hs = (0..=m).map(|_| reps[rng.gen_range(0..reps.len())].random_equivalent(rng)).collect();
    let seed = build_generalized_seed::<T>(&GenSeedSpec::new(n, hs)?)?;
    let lin: Vec<i64> = (0..vars.len()).map(|_| rng.gen_range(0..q as i64)).collect();
    seed.twist(&lin, rng.gen_range(0..q as i64))?.embed(total, vars)
}

/// A random order-2 seed along a shuffled `path`.
pub fn random_order2_seed(q: usize, path: &[usize], total: usize, rng: &mut impl Rng) -> Order2Seed {
    let mut path = path.to_vec();
    rand::seq::SliceRandom::shuffle(path.as_mut_slice(), rng);
    let mut linear = vec![0; total];
    for &v in &path {
        linear[v] = rng.gen_range(0..q as i64);
    }
    Order2Seed::new(path, linear, rng.gen_range(0..q as i64))
}

/// A construction tree, evaluated in a layout of `total` Boolean variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Plan {
    /// A constant BH matrix.
    Constant { h: PhaseMatrix },
    /// Generalized seed of order `2^n` whose `k`-th delay block uses
    /// `vars[kn..(k+1)n]`.
    Seed { n: usize, hs: Vec<PhaseMatrix>, vars: Vec<usize> },
    Order2 { seed: Order2Seed },
    /// Column `u` of the result is column `cols[u]` of the operand.
    ColumnPermute { of: Box<Plan>, cols: Vec<usize> },
    Theorem8 { h0: PhaseMatrix, h1: PhaseMatrix, seeds: Vec<Order2Seed> },
    Corollary7 { v0: Box<Plan>, v1: Box<Plan>, seeds: Vec<Order2Seed> },
    Theorem9 { h0: PhaseMatrix, h1: PhaseMatrix, seeds: Vec<Order2Seed>, x1: Vec<usize>, h2: PhaseMatrix, h3: PhaseMatrix },
    Theorem10 { us: Vec<Plan>, vs: Vec<Plan> },
    Theorem11 { v: Box<Plan>, us: Vec<Plan>, x0: Vec<usize> },
    Adb { a: Box<Plan>, b: Box<Plan>, x0: Vec<usize> },
}

/// Top-level plan document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFile {
    pub q: usize,
    /// Number of Boolean variables in the shared layout.
    pub vars: usize,
    pub root: Plan,
}

impl PlanFile {
    pub fn build<T: CoeffInt>(&self) -> Result<PolyMatrix<T>> {
        self.root.build(self.q, self.vars)
    }
}

impl Plan {
    pub fn build<T: CoeffInt>(&self, q: usize, total: usize) -> Result<PolyMatrix<T>> {
        let check_q = |h: &PhaseMatrix| if h.q == q { Ok(()) } else { Err(Error::ModulusMismatch { left: q, right: h.q }) };
        match self {
            Plan::Constant { h } => {
                check_q(h)?;
                if !h.is_bh() {
                    return Err(Error::NotBh);
                }
                Ok(h.to_polymatrix(total))
            }
            Plan::Seed { n, hs, vars } => {
                hs.iter().try_for_each(check_q)?;
                let spec = GenSeedSpec::new(*n, hs.clone())?;
                if vars.len() != spec.num_vars() {
                    return Err(Error::ShapeMismatch(format!("seed needs {} variables", spec.num_vars())));
                }
                build_generalized_seed::<T>(&spec)?.embed(total, vars)
            }
            Plan::Order2 { seed } => seed.build(q, total),
            Plan::ColumnPermute { of, cols } => {
                let m = of.build::<T>(q, total)?;
                validate_permutation(cols, m.order())?;
                let mut inverse = vec![0; cols.len()];
                for (u, &c) in cols.iter().enumerate() {
                    inverse[c] = u;
                }
                m.matmul(&PolyMatrix::permutation(q, total, &inverse)?)
            }
            Plan::Theorem8 { h0, h1, seeds } => {
                check_q(h0)?;
                theorem8_matrix(h0, h1, seeds, total)
            }
            Plan::Corollary7 { v0, v1, seeds } => corollary7_matrix(&v0.build(q, total)?, &v1.build(q, total)?, seeds),
            Plan::Theorem9 { h0, h1, seeds, x1, h2, h3 } => {
                check_q(h0)?;
                theorem9_matrix(h0, h1, seeds, x1, h2, h3, total)
            }
            Plan::Theorem10 { us, vs } => {
                let us = us.iter().map(|p| p.build(q, total)).collect::<Result<Vec<_>>>()?;
                let vs = vs.iter().map(|p| p.build(q, total)).collect::<Result<Vec<_>>>()?;
                theorem10_matrix(&us, &vs)
            }
            Plan::Theorem11 { v, us, x0 } => {
                let us = us.iter().map(|p| p.build(q, total)).collect::<Result<Vec<_>>>()?;
                theorem11_matrix(&v.build(q, total)?, &us, x0)
            }
            Plan::Adb { a, b, x0 } => compose_adb(&a.build(q, total)?, &b.build(q, total)?, x0),
        }
    }
}
