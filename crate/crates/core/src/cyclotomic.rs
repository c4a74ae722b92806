//! Exact arithmetic in the ring of integers of the q-th cyclotomic field.
//!
//! A [`CycInt`] stores `Σ_k a_k ω^k` for `ω = e^{2πi/q}` as `q` integer
//! coefficients, i.e. as an element of `Z[x]/(x^q - 1)`. Two values are equal
//! iff their difference is divisible by the cyclotomic polynomial `Φ_q`, which
//! is what [`CycInt::is_zero`] decides without any floating point.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Float, FloatConst, PrimInt, Signed};

use crate::error::{Error, Result};

/// Integer type usable as a cyclotomic coefficient.
pub trait CoeffInt:
    PrimInt + Signed + CheckedAdd + CheckedSub + CheckedMul + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

impl<T> CoeffInt for T where
    T: PrimInt + Signed + CheckedAdd + CheckedSub + CheckedMul + Hash + fmt::Debug + fmt::Display + Send + Sync + 'static
{
}

/// Univariate integer polynomial, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycPoly {
    coeffs: Vec<i64>,
}

impl CycPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        CycPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    /// Quotient and remainder by a monic divisor.
    fn div_rem_monic(&self, divisor: &CycPoly) -> (CycPoly, CycPoly) {
        assert!(divisor.is_monic(), "divisor must be monic");
        let d = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (CycPoly::new(vec![]), CycPoly::new(rem));
        }
        let mut quot = vec![0i64; rem.len() - d];
        for k in (d..rem.len()).rev() {
            let lead = rem[k];
            if lead == 0 {
                continue;
            }
            quot[k - d] = lead;
            for (i, &c) in divisor.coeffs.iter().enumerate() {
                rem[k - d + i] -= lead * c;
            }
        }
        rem.truncate(d);
        (CycPoly::new(quot), CycPoly::new(rem))
    }
}

impl fmt::Display for CycPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (k, a) {
                (0, _) => write!(f, "{a}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{a}x")?,
                (_, 1) => write!(f, "x^{k}")?,
                _ => write!(f, "{a}x^{k}")?,
            }
        }
        Ok(())
    }
}

fn phi_cache() -> &'static Mutex<HashMap<usize, Arc<CycPoly>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CycPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The q-th cyclotomic polynomial, `(x^q - 1) / Π_{d | q, d < q} Φ_d(x)`.
pub fn cyclotomic_polynomial(q: usize) -> Arc<CycPoly> {
    assert!(q >= 1, "cyclotomic polynomial needs q >= 1");
    if let Some(p) = phi_cache().lock().unwrap().get(&q) {
        return Arc::clone(p);
    }
    let mut num = vec![0i64; q + 1];
    num[0] = -1;
    num[q] = 1;
    let mut poly = CycPoly::new(num);
    for d in (1..q).filter(|d| q % d == 0) {
        let (quot, rem) = poly.div_rem_monic(&cyclotomic_polynomial(d));
        debug_assert!(rem.coeffs.is_empty());
        poly = quot;
    }
    let poly = Arc::new(poly);
    phi_cache()
        .lock()
        .unwrap()
        .entry(q)
        .or_insert_with(|| Arc::clone(&poly))
        .clone()
}

/// Element of `Z[ω]`, `ω` a primitive q-th root of unity.
#[derive(Clone, Debug)]
pub struct CycInt<T = i64> {
    q: usize,
    coeffs: Vec<T>,
}

impl<T: CoeffInt> CycInt<T> {
    pub fn zero(q: usize) -> Self {
        assert!(q >= 1);
        CycInt { q, coeffs: vec![T::zero(); q] }
    }

    pub fn from_int(q: usize, n: T) -> Self {
        let mut z = Self::zero(q);
        z.coeffs[0] = n;
        z
    }

    pub fn one(q: usize) -> Self {
        Self::from_int(q, T::one())
    }

    /// `ω^s`.
    pub fn root(q: usize, s: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::Domain("modulus must be positive".into()));
        }
        if s >= q {
            return Err(Error::InvalidPhase { phase: s as i64, q });
        }
        let mut z = Self::zero(q);
        z.coeffs[s] = T::one();
        Ok(z)
    }

    /// `ω^s` for any integer `s`, reduced mod q.
    pub fn root_of(q: usize, s: i64) -> Self {
        let k = s.rem_euclid(q as i64) as usize;
        Self::root(q, k).expect("reduced phase is in range")
    }

    pub fn from_coeffs(q: usize, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != q || q == 0 {
            return Err(Error::Domain(format!(
                "expected {q} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(CycInt { q, coeffs })
    }

    pub fn modulus(&self) -> usize {
        self.q
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    fn same_modulus(&self, other: &Self) -> Result<()> {
        if self.q != other.q {
            return Err(Error::ModulusMismatch { left: self.q, right: other.q });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_modulus(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_add(b).ok_or(Error::Overflow))
            .collect::<Result<_>>()?;
        Ok(CycInt { q: self.q, coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_modulus(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.checked_sub(b).ok_or(Error::Overflow))
            .collect::<Result<_>>()?;
        Ok(CycInt { q: self.q, coeffs })
    }

    /// Product, as a convolution modulo `x^q - 1`.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_modulus(other)?;
        let q = self.q;
        let mut out = vec![T::zero(); q];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let k = (i + j) % q;
                let prod = a.checked_mul(b).ok_or(Error::Overflow)?;
                out[k] = out[k].checked_add(&prod).ok_or(Error::Overflow)?;
            }
        }
        Ok(CycInt { q, coeffs: out })
    }

    /// Multiply by `ω^s`; a rotation of the coefficient vector.
    pub fn mul_root(&self, s: usize) -> Self {
        let q = self.q;
        let mut out = vec![T::zero(); q];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[(k + s) % q] = *c;
        }
        CycInt { q, coeffs: out }
    }

    /// Complex conjugate: `ω^k ↦ ω^{-k}`.
    pub fn conjugate(&self) -> Self {
        let q = self.q;
        let mut out = vec![T::zero(); q];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[(q - k) % q] = *c;
        }
        CycInt { q, coeffs: out }
    }

    pub fn is_syntactically_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Remainder of `Σ a_k x^k` modulo `Φ_q`, padded to `deg Φ_q` entries.
    ///
    /// This is the unique representative of the value in `Z[x]/Φ_q`, so two
    /// `CycInt`s are equal iff their reduced forms are equal.
    pub fn reduced(&self) -> Vec<T> {
        let phi = cyclotomic_polynomial(self.q);
        let d = phi.degree().expect("cyclotomic polynomials are nonzero");
        let phi: Vec<T> = phi
            .coeffs()
            .iter()
            .map(|&c| T::from(c).expect("cyclotomic coefficient fits"))
            .collect();
        let mut rem = self.coeffs.clone();
        for k in (d..rem.len()).rev() {
            let lead = rem[k];
            if lead.is_zero() {
                continue;
            }
            for (i, c) in phi.iter().enumerate() {
                let delta = lead.checked_mul(c).expect("cyclotomic reduction overflow");
                rem[k - d + i] = rem[k - d + i]
                    .checked_sub(&delta)
                    .expect("cyclotomic reduction overflow");
            }
        }
        rem.truncate(d);
        rem.resize(d, T::zero());
        rem
    }

    /// Exact test for `Φ_q | Σ a_k x^k`.
    pub fn is_zero(&self) -> bool {
        self.is_syntactically_zero() || self.reduced().iter().all(|c| c.is_zero())
    }

    /// The phase `s` with `self == ω^s`, if any.
    pub fn as_single_root(&self) -> Option<usize> {
        let r = self.reduced();
        root_table::<T>(self.q).iter().position(|t| *t == r)
    }

    /// The integer `k` with `self == k`, if any.
    pub fn as_integer(&self) -> Option<T> {
        let r = self.reduced();
        if r.iter().skip(1).all(|c| c.is_zero()) {
            Some(r.first().copied().unwrap_or_else(T::zero))
        } else {
            None
        }
    }

    /// Floating-point value; used only for cross-checks and display.
    pub fn to_complex<F: Float + FloatConst>(&self) -> Complex<F> {
        let q = F::from(self.q).unwrap();
        self.coeffs
            .iter()
            .enumerate()
            .fold(Complex::new(F::zero(), F::zero()), |acc, (k, c)| {
                let theta = F::TAU() * F::from(k).unwrap() / q;
                acc + Complex::from_polar(F::one(), theta) * F::from(*c).unwrap()
            })
    }
}

/// Reduced forms of `ω^0, …, ω^{q-1}`, computed per call; q is small.
fn root_table<T: CoeffInt>(q: usize) -> Vec<Vec<T>> {
    (0..q)
        .map(|s| CycInt::<T>::root(q, s).expect("in range").reduced())
        .collect()
}

impl<T: CoeffInt> PartialEq for CycInt<T> {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.checked_sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }
}

impl<T: CoeffInt> Eq for CycInt<T> {}

impl<T: CoeffInt> fmt::Display for CycInt<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                _ => format!("{c}·ω^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl<T: CoeffInt> std::ops::$trait<&CycInt<T>> for &CycInt<T> {
            type Output = CycInt<T>;
            fn $method(self, rhs: &CycInt<T>) -> CycInt<T> {
                self.$checked(rhs).expect("cyclotomic arithmetic failed")
            }
        }
        impl<T: CoeffInt> std::ops::$trait for CycInt<T> {
            type Output = CycInt<T>;
            fn $method(self, rhs: CycInt<T>) -> CycInt<T> {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl<T: CoeffInt> std::ops::Neg for CycInt<T> {
    type Output = CycInt<T>;
    fn neg(self) -> CycInt<T> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| T::zero().checked_sub(c).expect("negation overflow"))
            .collect();
        CycInt { q: self.q, coeffs }
    }
}

/// Sum of `counts[k] · ω^k`, the shape every correlation sum takes.
pub fn from_phase_counts<T: CoeffInt>(q: usize, counts: &[i64]) -> Result<CycInt<T>> {
    let coeffs = counts
        .iter()
        .map(|&c| T::from(c).ok_or(Error::Overflow))
        .collect::<Result<Vec<T>>>()?;
    CycInt::from_coeffs(q, coeffs)
}
