//! Exact scalars: polynomials over ℚ in the two deformation parameters `h`
//! and `hbar`, plus the one and only Koszul sign routine.
//!
//! Every sign in the engine is ultimately produced by [`koszul_sign`]; other
//! modules build their transport rules (rotations, operator commutation) on
//! top of it so that sign conventions cannot drift apart.

use crate::error::{EngineError, Result};
use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

/// Arbitrary-precision rational.
pub type Rat = Ratio<BigInt>;

pub fn rat_int(n: i64) -> Rat {
    Ratio::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// `(-1)^k` as a rational.
pub fn sign_pow(k: i64) -> Rat {
    if k.rem_euclid(2) == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

/// An element of ℚ[h, hbar], stored sparsely: `(p, q) -> c_{p,q}` with all
/// stored coefficients nonzero. Both parameters carry degree `n - 2` where
/// `n` is the session Calabi–Yau dimension; degree bookkeeping lives with the
/// callers, this type only tracks exponents exactly.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scalar {
    terms: BTreeMap<(u32, u32), Rat>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Scalar::from_rat(Rat::one())
    }

    pub fn from_rat(c: Rat) -> Self {
        let mut s = Scalar::zero();
        if !c.is_zero() {
            s.terms.insert((0, 0), c);
        }
        s
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_rat(rat_int(n))
    }

    /// The parameter `h`.
    pub fn h() -> Self {
        Scalar::monomial(1, 0, Rat::one())
    }

    /// The parameter `hbar`.
    pub fn hbar() -> Self {
        Scalar::monomial(0, 1, Rat::one())
    }

    pub fn monomial(p: u32, q: u32, c: Rat) -> Self {
        let mut s = Scalar::zero();
        if !c.is_zero() {
            s.terms.insert((p, q), c);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(0, 0).is_one()
    }

    /// Coefficient of `h^p * hbar^q` (zero if absent).
    pub fn coeff(&self, p: u32, q: u32) -> Rat {
        self.terms.get(&(p, q)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Rat)> {
        self.terms.iter()
    }

    /// Image under h = hbar = 0, i.e. the constant coefficient.
    pub fn reduce_mod_params(&self) -> Rat {
        self.coeff(0, 0)
    }

    /// True if no term involves `h` or `hbar`.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&(p, q)| p == 0 && q == 0)
    }

    /// Extract the sub-polynomial with exactly the given exponents, as a rational.
    pub fn coeff_of(&self, p: u32, q: u32) -> Rat {
        self.coeff(p, q)
    }

    pub fn mul_rat(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Scalar::zero();
        }
        let mut out = Scalar::zero();
        for (&k, v) in &self.terms {
            out.terms.insert(k, v * c);
        }
        out
    }

    /// Multiply by `h^p * hbar^q`.
    pub fn mul_params(&self, p: u32, q: u32) -> Self {
        let mut out = Scalar::zero();
        for (&(a, b), v) in &self.terms {
            out.terms.insert((a + p, b + q), v.clone());
        }
        out
    }

    /// Total parameter weight p+q if the scalar is a single monomial times a
    /// rational, otherwise None. Used for grading assertions.
    pub fn single_param_weight(&self) -> Option<u32> {
        let mut weights = self.terms.keys().map(|&(p, q)| p + q);
        let first = weights.next()?;
        if weights.all(|w| w == first) {
            Some(first)
        } else {
            None
        }
    }

    fn insert_add(&mut self, key: (u32, u32), c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        let mut out = self;
        for (k, v) in rhs.terms {
            out.insert_add(k, v);
        }
        out
    }
}

impl AddAssign<Scalar> for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        for (k, v) in rhs.terms {
            self.insert_add(k, v);
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        let mut out = Scalar::zero();
        for (k, v) in self.terms {
            out.terms.insert(k, -v);
        }
        out
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (&(p1, q1), c1) in &self.terms {
            for (&(p2, q2), c2) in &rhs.terms {
                out.insert_add((p1 + p2, q1 + q2), c1 * c2);
            }
        }
        out
    }
}

/// Canonical form: `c*h^p*hbar^q` terms joined by ` + `, ordered by `(p, q)`,
/// parameter factors omitted when the exponent is zero. `Display` and
/// `FromStr` round-trip bit-exactly.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&(p, q), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", c)?;
            if p > 0 {
                write!(f, "*h^{}", p)?;
            }
            if q > 0 {
                write!(f, "*hbar^{}", q)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Scalar {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Scalar> {
        let s = s.trim();
        if s == "0" {
            return Ok(Scalar::zero());
        }
        let mut out = Scalar::zero();
        for term in s.split(" + ") {
            let mut coeff: Option<Rat> = None;
            let mut p = 0u32;
            let mut q = 0u32;
            for factor in term.split('*') {
                let factor = factor.trim();
                if let Some(rest) = factor.strip_prefix("hbar^") {
                    q = rest
                        .parse()
                        .map_err(|_| EngineError::Input(format!("bad exponent in {factor:?}")))?;
                } else if let Some(rest) = factor.strip_prefix("h^") {
                    p = rest
                        .parse()
                        .map_err(|_| EngineError::Input(format!("bad exponent in {factor:?}")))?;
                } else {
                    let c = Rat::from_str(factor).map_err(|_| {
                        EngineError::Input(format!("bad rational coefficient {factor:?}"))
                    })?;
                    if coeff.is_some() {
                        return Err(EngineError::Input(format!(
                            "two coefficients in term {term:?}"
                        )));
                    }
                    coeff = Some(c);
                }
            }
            let c =
                coeff.ok_or_else(|| EngineError::Input(format!("term {term:?} lacks coefficient")))?;
            out.insert_add((p, q), c);
        }
        Ok(out)
    }
}

/// The Koszul sign of a permutation acting on homogeneous letters.
///
/// `pi[i]` is the position letter `i` is sent to; `degrees[i]` is the degree
/// of letter `i`. The sign is the product over crossing pairs (`i < j` with
/// `pi[i] > pi[j]`) of `(-1)^(degrees[i] * degrees[j])` — only parities
/// matter. Satisfies the cocycle rule
/// `koszul_sign(pi∘sigma, d) = koszul_sign(pi, sigma·d) * koszul_sign(sigma, d)`.
pub fn koszul_sign(pi: &[usize], degrees: &[i64]) -> Result<i8> {
    if pi.len() != degrees.len() {
        return Err(EngineError::Input(format!(
            "koszul_sign: permutation length {} != degrees length {}",
            pi.len(),
            degrees.len()
        )));
    }
    let n = pi.len();
    let mut seen = vec![false; n];
    for &p in pi {
        if p >= n || seen[p] {
            return Err(EngineError::Input(format!(
                "koszul_sign: {pi:?} is not a permutation of 0..{n}"
            )));
        }
        seen[p] = true;
    }
    let mut odd_crossings = 0u64;
    for i in 0..n {
        for j in (i + 1)..n {
            if pi[i] > pi[j] && degrees[i] % 2 != 0 && degrees[j] % 2 != 0 {
                odd_crossings += 1;
            }
        }
    }
    Ok(if odd_crossings % 2 == 0 { 1 } else { -1 })
}

/// Sign for rotating one letter from the front of a word to the back:
/// `(x1, x2, .., xk) -> (x2, .., xk, x1)` where `degrees` are the letter
/// degrees in the *original* order. Built on [`koszul_sign`].
pub fn rotation_sign(degrees: &[i64]) -> Result<i8> {
    let n = degrees.len();
    if n <= 1 {
        return Ok(1);
    }
    // letter 0 goes to position n-1, letter i (i>0) to position i-1
    let mut pi = Vec::with_capacity(n);
    pi.push(n - 1);
    for i in 1..n {
        pi.push(i - 1);
    }
    koszul_sign(&pi, degrees)
}

/// Sign for swapping two adjacent homogeneous blocks `A ⊗ B -> B ⊗ A`.
pub fn block_swap_sign(deg_a: i64, deg_b: i64) -> i8 {
    if deg_a % 2 != 0 && deg_b % 2 != 0 {
        -1
    } else {
        1
    }
}

/// A graded basis symbol: an opaque identifier together with its homological
/// degree and weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradedSymbol {
    pub name: String,
    pub degree: i64,
    pub weight: u32,
}

impl GradedSymbol {
    pub fn new(name: impl Into<String>, degree: i64, weight: u32) -> Self {
        GradedSymbol { name: name.into(), degree, weight }
    }
}
