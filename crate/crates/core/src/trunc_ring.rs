//! Exact arithmetic in `A_I = k[P]/I` and in chamber rings `A_I[Lambda]`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{MirrorError, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent of `t`; nonnegative on `P`, signed inside chamber computations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CurveClass(pub Vec<i64>);

impl CurveClass {
    pub fn zero(rank: usize) -> Self {
        CurveClass(vec![0; rank])
    }

    pub fn generator(rank: usize, k: usize) -> Self {
        let mut v = vec![0; rank];
        v[k] = 1;
        CurveClass(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Membership in `P`.
    pub fn in_p(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn add(&self, o: &CurveClass) -> CurveClass {
        CurveClass(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &CurveClass) -> CurveClass {
        CurveClass(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> CurveClass {
        CurveClass(self.0.iter().map(|a| a * k).collect())
    }

    /// `C1+C3` style rendering against generator names.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, &c) in self.0.iter().enumerate() {
            let name = names.get(k).cloned().unwrap_or_else(|| format!("C{}", k + 1));
            match c {
                0 => {}
                1 => parts.push(name),
                -1 => parts.push(format!("-{name}")),
                _ => parts.push(format!("{c}{name}")),
            }
        }
        parts.join("+").replace("+-", "-")
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&[]))
    }
}

/// `I = {beta : <weight, beta> >= bound}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationIdeal {
    weights: Vec<u64>,
    bound: u64,
}

impl TruncationIdeal {
    pub fn new(weights: Vec<u64>, bound: u64) -> Result<Self> {
        if weights.contains(&0) {
            return Err(MirrorError::Precondition("truncation weights must be >= 1".into()));
        }
        Ok(TruncationIdeal { weights, bound })
    }

    /// Unit weights.
    pub fn unit(rank: usize, bound: u64) -> Self {
        TruncationIdeal { weights: vec![1; rank], bound }
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn degree(&self, beta: &[i64]) -> i64 {
        beta.iter().zip(&self.weights).map(|(b, &w)| b * w as i64).sum()
    }

    pub fn contains(&self, beta: &[i64]) -> bool {
        self.degree(beta) >= self.bound as i64
    }

    /// Same weights, different bound.
    pub fn with_bound(&self, bound: u64) -> Self {
        TruncationIdeal { weights: self.weights.clone(), bound }
    }

    /// Every class of `P \ I`, lexicographically.
    pub fn classes_below(&self) -> Vec<CurveClass> {
        let mut out = Vec::new();
        let mut cur = vec![0i64; self.weights.len()];
        fn rec(w: &[u64], i: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<CurveClass>) {
            if i == w.len() {
                out.push(CurveClass(cur.clone()));
                return;
            }
            let mut k = 0;
            while k * (w[i] as i64) < left {
                cur[i] = k;
                rec(w, i + 1, left - k * w[i] as i64, cur, out);
                k += 1;
            }
            cur[i] = 0;
        }
        if self.bound > 0 {
            rec(&self.weights, 0, self.bound as i64, &mut cur, &mut out);
        }
        out.sort();
        out
    }
}

/// Monomial exponent of a series type.
pub trait Exponent: Clone + Ord + fmt::Debug {
    fn combine(&self, other: &Self) -> Self;
    fn beta(&self) -> &[i64];
    /// The neutral exponent of the same shape.
    fn neutral(&self) -> Self;
    fn render(&self, names: &[String]) -> String;
}

impl Exponent for CurveClass {
    fn combine(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn beta(&self) -> &[i64] {
        &self.0
    }
    fn neutral(&self) -> Self {
        CurveClass::zero(self.0.len())
    }
    fn render(&self, names: &[String]) -> String {
        if self.is_zero() {
            String::new()
        } else {
            format!("t^{{{}}}", self.display_with(names))
        }
    }
}

/// `t^beta z^m`, ordered lexicographically on `(beta, m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mono {
    pub beta: Vec<i64>,
    pub m: Vec<i64>,
}

impl Mono {
    pub fn new(beta: Vec<i64>, m: Vec<i64>) -> Self {
        Mono { beta, m }
    }
}

impl Exponent for Mono {
    fn combine(&self, other: &Self) -> Self {
        Mono {
            beta: self.beta.iter().zip(&other.beta).map(|(a, b)| a + b).collect(),
            m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect(),
        }
    }
    fn beta(&self) -> &[i64] {
        &self.beta
    }
    fn neutral(&self) -> Self {
        Mono { beta: vec![0; self.beta.len()], m: vec![0; self.m.len()] }
    }
    fn render(&self, names: &[String]) -> String {
        let t = CurveClass(self.beta.clone()).render(names);
        let z = if self.m.iter().all(|&c| c == 0) {
            String::new()
        } else {
            format!("z^({})", self.m.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
        };
        format!("{t}{z}")
    }
}

/// Finite `Q`-linear combination of monomials with exponents `K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series<K: Exponent> {
    unit: K,
    terms: BTreeMap<K, Q>,
}

/// Element of `A_I`.
pub type TruncatedSeries = Series<CurveClass>;
/// Element of `A_I[Lambda]`.
pub type LaurentElement = Series<Mono>;

impl<K: Exponent> Series<K> {
    pub fn zero_like(unit: K) -> Self {
        Series { unit: unit.neutral(), terms: BTreeMap::new() }
    }

    pub fn one_like(unit: K) -> Self {
        let u = unit.neutral();
        Series { terms: BTreeMap::from([(u.clone(), Q::one())]), unit: u }
    }

    pub fn monomial(unit: &K, key: K, c: Q) -> Self {
        let mut s = Series::zero_like(unit.clone());
        s.add_term(key, c);
        s
    }

    /// Build from terms, merging duplicates and dropping zeros and classes in `I`.
    pub fn from_terms<T: IntoIterator<Item = (K, Q)>>(unit: &K, terms: T, ideal: &TruncationIdeal) -> Self {
        let mut s = Series::zero_like(unit.clone());
        for (k, c) in terms {
            if !ideal.contains(k.beta()) {
                s.add_term(k, c);
            }
        }
        s
    }

    pub fn unit_exponent(&self) -> &K {
        &self.unit
    }

    pub fn zero(&self) -> Self {
        Series::zero_like(self.unit.clone())
    }

    pub fn one(&self) -> Self {
        Series::one_like(self.unit.clone())
    }

    pub fn add_term(&mut self, k: K, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(k.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&K, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, k: &K) -> Q {
        self.terms.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coeff(&self.unit).is_one()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        for (k, c) in &o.terms {
            s.add_term(k.clone(), c.clone());
        }
        s
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut s = self.zero();
        for (k, v) in &self.terms {
            s.add_term(k.clone(), v * c);
        }
        s
    }

    /// Multiply every exponent by a fixed monomial.
    pub fn shift(&self, by: &K) -> Self {
        let mut s = self.zero();
        for (k, v) in &self.terms {
            s.add_term(k.combine(by), v.clone());
        }
        s
    }

    pub fn mul(&self, o: &Self, ideal: &TruncationIdeal) -> Self {
        let mut s = self.zero();
        for (k1, c1) in &self.terms {
            for (k2, c2) in &o.terms {
                let k = k1.combine(k2);
                if !ideal.contains(k.beta()) {
                    s.add_term(k, c1 * c2);
                }
            }
        }
        s
    }

    pub fn pow(&self, e: u32, ideal: &TruncationIdeal) -> Self {
        let mut acc = self.one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, ideal);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, ideal);
            }
        }
        acc.reduce(ideal)
    }

    /// Drop terms whose class lies in `I`.
    pub fn reduce(&self, ideal: &TruncationIdeal) -> Self {
        let mut s = self.zero();
        for (k, c) in &self.terms {
            if !ideal.contains(k.beta()) {
                s.add_term(k.clone(), c.clone());
            }
        }
        s
    }

    /// True if every term has positive degree.
    pub fn is_nilpotent(&self, ideal: &TruncationIdeal) -> bool {
        self.terms.keys().all(|k| ideal.degree(k.beta()) >= 1 && k.beta().iter().all(|&b| b >= 0))
    }

    fn check_one_unit(&self, ideal: &TruncationIdeal) -> Result<Self> {
        if !self.coeff(&self.unit).is_one() {
            return Err(MirrorError::Precondition("argument is not 1 mod m".into()));
        }
        let y = self.sub(&self.one());
        if !y.is_nilpotent(ideal) {
            return Err(MirrorError::Precondition("argument is not 1 mod m".into()));
        }
        Ok(y)
    }

    /// Inverse of a unit `f = 1 + y` with `y` nilpotent.
    pub fn inv_unit(&self, ideal: &TruncationIdeal) -> Result<Self> {
        let y = self.check_one_unit(ideal)?;
        let my = y.neg();
        let mut acc = self.one();
        let mut p = self.one();
        loop {
            p = p.mul(&my, ideal);
            if p.is_zero() {
                break;
            }
            acc = acc.add(&p);
        }
        Ok(acc)
    }

    /// `f^e` for a unit `f = 1 + y`, any integer `e`.
    pub fn pow_signed(&self, e: i64, ideal: &TruncationIdeal) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u32, ideal))
        } else {
            Ok(self.inv_unit(ideal)?.pow((-e) as u32, ideal))
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let mono = k.render(names);
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if mono.is_empty() {
                out.push_str(&a.to_string());
            } else if !a.is_one() {
                out.push_str(&format!("{a}*{mono}"));
            } else {
                out.push_str(&mono);
            }
        }
        out
    }
}

impl<K: Exponent> fmt::Display for Series<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(&[]))
    }
}

impl TruncatedSeries {
    pub fn zero_series(rank: usize) -> Self {
        Series::zero_like(CurveClass::zero(rank))
    }

    pub fn one_series(rank: usize) -> Self {
        Series::one_like(CurveClass::zero(rank))
    }

    /// `c t^beta`, or zero when `beta` lies in `I`.
    pub fn t_pow(beta: &CurveClass, c: Q, ideal: &TruncationIdeal) -> Self {
        Series::from_terms(&CurveClass::zero(beta.rank()), [(beta.clone(), c)], ideal)
    }

    /// Keep only the `beta = 0` coefficient.
    pub fn constant_part(&self) -> Self {
        let mut s = self.zero();
        s.add_term(self.unit.clone(), self.coeff(&self.unit));
        s
    }
}

impl LaurentElement {
    pub fn zero_laurent(rank: usize, mdim: usize) -> Self {
        Series::zero_like(Mono::new(vec![0; rank], vec![0; mdim]))
    }

    pub fn one_laurent(rank: usize, mdim: usize) -> Self {
        Series::one_like(Mono::new(vec![0; rank], vec![0; mdim]))
    }

    pub fn rank(&self) -> usize {
        self.unit.beta.len()
    }

    pub fn mdim(&self) -> usize {
        self.unit.m.len()
    }

    /// `c t^beta z^m`.
    pub fn term(beta: Vec<i64>, m: Vec<i64>, c: Q) -> Self {
        let unit = Mono::new(vec![0; beta.len()], vec![0; m.len()]);
        Series::monomial(&unit, Mono::new(beta, m), c)
    }

    /// Apply `z^m -> z^{g(m)}` to every exponent.
    pub fn map_exponents<F: Fn(&[i64]) -> Vec<i64>>(&self, mdim: usize, g: F) -> Self {
        let mut s = Series::zero_like(Mono::new(vec![0; self.rank()], vec![0; mdim]));
        for (k, c) in &self.terms {
            s.add_term(Mono::new(k.beta.clone(), g(&k.m)), c.clone());
        }
        s
    }
}

/// `exp(x)` for nilpotent `x`.
pub fn exp_nilpotent<K: Exponent>(x: &Series<K>, ideal: &TruncationIdeal) -> Result<Series<K>> {
    if !x.is_nilpotent(ideal) {
        return Err(MirrorError::Precondition("exp argument is not in m".into()));
    }
    let mut acc = x.one();
    let mut p = x.one();
    let mut k = 1i64;
    loop {
        p = p.mul(x, ideal).scale(&q_frac(1, k));
        if p.is_zero() {
            break;
        }
        acc = acc.add(&p);
        k += 1;
    }
    Ok(acc)
}

/// `log(f)` for a unit `f = 1 + y`.
pub fn log_unit<K: Exponent>(f: &Series<K>, ideal: &TruncationIdeal) -> Result<Series<K>> {
    let y = f.check_one_unit(ideal)?;
    let mut acc = f.zero();
    let mut p = f.one();
    let mut k = 1i64;
    loop {
        p = p.mul(&y, ideal);
        if p.is_zero() {
            break;
        }
        let sign = if k % 2 == 1 { 1 } else { -1 };
        acc = acc.add(&p.scale(&q_frac(sign, k)));
        k += 1;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(beta: &[i64]) -> TruncatedSeries {
        TruncatedSeries::t_pow(&CurveClass(beta.to_vec()), q(1), &TruncationIdeal::unit(beta.len(), 100))
    }

    #[test]
    fn cross_term_truncated() {
        let i = TruncationIdeal::unit(2, 2);
        let one = TruncatedSeries::one_series(2);
        let a = one.add(&t(&[1, 0]));
        let b = one.add(&t(&[0, 1]));
        let expect = one.add(&t(&[1, 0])).add(&t(&[0, 1]));
        assert_eq!(a.mul(&b, &i), expect);
        assert_eq!(a.mul(&one, &i), a);
    }

    #[test]
    fn difference_of_squares() {
        let i = TruncationIdeal::unit(1, 3);
        let one = LaurentElement::one_laurent(1, 2);
        let x = LaurentElement::term(vec![1], vec![1, 0], q(1));
        let got = one.add(&x).mul(&one.sub(&x), &i);
        let expect = one.sub(&LaurentElement::term(vec![2], vec![2, 0], q(1)));
        assert_eq!(got, expect);
    }

    #[test]
    fn exp_of_zero_is_one() {
        let i = TruncationIdeal::unit(1, 4);
        let z = LaurentElement::zero_laurent(1, 2);
        assert!(exp_nilpotent(&z, &i).unwrap().is_one());
    }

    #[test]
    fn exp_log_inverse() {
        let i = TruncationIdeal::unit(1, 4);
        let x = LaurentElement::term(vec![1], vec![1, -1], q(1));
        assert_eq!(log_unit(&exp_nilpotent(&x, &i).unwrap(), &i).unwrap(), x);
    }

    #[test]
    fn multiple_cover_identity() {
        // exp(sum_k k * (-1)^{k+1}/k^2 x^k) = 1 + x, with x = t z^{-u}
        let i = TruncationIdeal::unit(1, 4);
        let mut arg = LaurentElement::zero_laurent(1, 2);
        for k in 1..=3i64 {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            let c = q(k) * q_frac(sign, k * k);
            arg = arg.add(&LaurentElement::term(vec![k], vec![0, -k], c));
        }
        let f = exp_nilpotent(&arg, &i).unwrap();
        let expect = LaurentElement::one_laurent(1, 2).add(&LaurentElement::term(vec![1], vec![0, -1], q(1)));
        assert_eq!(f, expect);
    }

    #[test]
    fn exp_rejects_units() {
        let i = TruncationIdeal::unit(1, 4);
        assert!(exp_nilpotent(&LaurentElement::one_laurent(1, 2), &i).is_err());
    }

    #[test]
    fn classes_below_counts() {
        assert_eq!(TruncationIdeal::unit(3, 3).classes_below().len(), 10);
        assert_eq!(TruncationIdeal::new(vec![1, 2], 3).unwrap().classes_below().len(), 4);
    }

    #[test]
    fn inverse_of_unit() {
        let i = TruncationIdeal::unit(1, 5);
        let f = LaurentElement::one_laurent(1, 2).add(&LaurentElement::term(vec![1], vec![1, 0], q(1)));
        let g = f.pow_signed(-3, &i).unwrap();
        assert!(f.pow(3, &i).mul(&g, &i).is_one());
    }
}
