//! Exact scalars: elements of a cyclotomic field `Q(ζ_N)` times formal square roots.
//!
//! A [`Scalar`] is a finite sum `Σ_r c_r · √r` over squarefree radicands `r`, where each
//! `c_r` is a [`Cyclotomic`] number reduced modulo the cyclotomic polynomial `Φ_N`.
//! Terms of different root orders are lifted to the least common multiple on demand, so
//! equality is decided by subtracting and testing for zero. The coefficient type is
//! generic; the crate root fixes it to `BigRational`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Coefficient field for [`Cyclotomic`] and [`Scalar`].
pub trait Coefficient:
  Clone + PartialEq + Num + Neg<Output = Self> + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync
{
}

impl<T> Coefficient for T where
  T: Clone + PartialEq + Num + Neg<Output = T> + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync
{
}

/// Integer coefficients of the cyclotomic polynomial `Φ_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i64> {
  assert!(n >= 1, "cyclotomic polynomial of order 0");
  // x^n - 1 divided by Φ_d for every proper divisor d.
  let mut num = vec![0i64; n + 1];
  num[0] = -1;
  num[n] = 1;
  for d in (1..n).filter(|d| n.is_multiple_of(*d)) {
    num = poly_div_exact(&num, &cyclotomic_polynomial(d));
  }
  num
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
  let mut rem = num.to_vec();
  let dd = den.len() - 1;
  let lead = den[dd];
  let mut quot = vec![0i64; rem.len() - dd];
  for i in (0..quot.len()).rev() {
    let c = rem[i + dd] / lead;
    quot[i] = c;
    for (j, &dj) in den.iter().enumerate() {
      rem[i + j] -= c * dj;
    }
  }
  debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
  quot
}

/// An element of `Q(ζ_N)`, stored as the coefficients of the unique representative of
/// degree `< φ(N)` in the power basis of `ζ_N`.
#[derive(Clone, Debug)]
pub struct Cyclotomic<T> {
  order:  usize,
  coeffs: Vec<T>,
}

impl<T: Coefficient> Cyclotomic<T> {
  /// Reduces arbitrary power-basis coefficients (index = exponent of `ζ_N`).
  pub fn from_powers(order: usize, powers: Vec<T>) -> Self {
    let order = order.max(1);
    let phi = cyclotomic_polynomial(order);
    let d = phi.len() - 1;
    let mut p = powers;
    // First fold exponents modulo N, then reduce modulo Φ_N (monic).
    if p.len() > order {
      let mut folded = vec![T::zero(); order];
      for (k, c) in p.into_iter().enumerate() {
        folded[k % order] = folded[k % order].clone() + c;
      }
      p = folded;
    }
    for i in (d..p.len()).rev() {
      let c = p[i].clone();
      if c.is_zero() {
        continue;
      }
      for (j, &pj) in phi.iter().enumerate().take(d) {
        if pj != 0 {
          let k = i - d + j;
          p[k] = p[k].clone() - c.clone() * T::from_i64(pj).expect("small integer");
        }
      }
      p[i] = T::zero();
    }
    p.resize(d, T::zero());
    Self { order, coeffs: p }
  }

  /// A rational number viewed in `Q(ζ_1) = Q`.
  pub fn rational(value: T) -> Self { Self { order: 1, coeffs: vec![value] } }

  /// `ζ_n^k`.
  pub fn zeta(n: usize, k: i64) -> Self {
    let n = n.max(1);
    let e = k.rem_euclid(n as i64) as usize;
    let mut p = vec![T::zero(); n];
    p[e] = T::one();
    Self::from_powers(n, p)
  }

  /// The root order `N` of the field this value is expressed in.
  pub fn order(&self) -> usize { self.order }

  /// Reduced coefficients (length `φ(N)`).
  pub fn coeffs(&self) -> &[T] { &self.coeffs }

  /// Whether the value is zero.
  pub fn is_zero(&self) -> bool { self.coeffs.iter().all(|c| c.is_zero()) }

  /// Re-expresses the value in `Q(ζ_m)` for a multiple `m` of the current order.
  pub fn lift(&self, m: usize) -> Self {
    if m == self.order {
      return self.clone();
    }
    assert!(m.is_multiple_of(self.order), "lift target {m} is not a multiple of {}", self.order);
    let step = m / self.order;
    let mut p = vec![T::zero(); m];
    for (k, c) in self.coeffs.iter().enumerate() {
      p[k * step] = c.clone();
    }
    Self::from_powers(m, p)
  }

  fn common(&self, other: &Self) -> (Self, Self) {
    let m = self.order.lcm(&other.order);
    (self.lift(m), other.lift(m))
  }

  /// Multiplies every coefficient by a field element.
  pub fn scale(&self, k: &T) -> Self {
    Self { order: self.order, coeffs: self.coeffs.iter().map(|c| c.clone() * k.clone()).collect() }
  }

  /// The value as a rational if it lies in `Q`.
  pub fn as_rational(&self) -> Option<T> {
    if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
      Some(self.coeffs.first().cloned().unwrap_or_else(T::zero))
    } else {
      None
    }
  }
}

impl<T: Coefficient> PartialEq for Cyclotomic<T> {
  fn eq(&self, other: &Self) -> bool {
    let (a, b) = self.common(other);
    a.coeffs == b.coeffs
  }
}

impl<T: Coefficient> Add for &Cyclotomic<T> {
  type Output = Cyclotomic<T>;
  fn add(self, rhs: Self) -> Cyclotomic<T> {
    let (a, b) = self.common(rhs);
    let coeffs = a.coeffs.into_iter().zip(b.coeffs).map(|(x, y)| x + y).collect();
    Cyclotomic { order: a.order, coeffs }
  }
}

impl<T: Coefficient> Neg for &Cyclotomic<T> {
  type Output = Cyclotomic<T>;
  fn neg(self) -> Cyclotomic<T> {
    Cyclotomic { order: self.order, coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
  }
}

impl<T: Coefficient> Mul for &Cyclotomic<T> {
  type Output = Cyclotomic<T>;
  fn mul(self, rhs: Self) -> Cyclotomic<T> {
    let (a, b) = self.common(rhs);
    let mut p = vec![T::zero(); (a.coeffs.len() + b.coeffs.len()).saturating_sub(1).max(1)];
    for (i, x) in a.coeffs.iter().enumerate() {
      if x.is_zero() {
        continue;
      }
      for (j, y) in b.coeffs.iter().enumerate() {
        p[i + j] = p[i + j].clone() + x.clone() * y.clone();
      }
    }
    Cyclotomic::from_powers(a.order, p)
  }
}

impl<T: Coefficient> fmt::Display for Cyclotomic<T> {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let terms: Vec<String> = self
      .coeffs
      .iter()
      .enumerate()
      .filter(|(_, c)| !c.is_zero())
      .map(|(k, c)| if k == 0 { c.to_string() } else { format!("{c} * zeta{}^{k}", self.order) })
      .collect();
    match terms.len() {
      0 => write!(f, "0"),
      1 => write!(f, "{}", terms[0]),
      _ => write!(f, "({})", terms.join(" + ")),
    }
  }
}

/// A finite sum `Σ_r c_r · √r` with cyclotomic coefficients and squarefree radicands.
#[derive(Clone, Debug)]
pub struct Scalar<T> {
  terms: BTreeMap<u64, Cyclotomic<T>>,
}

fn squarefree_split(mut r: u64) -> (u64, u64) {
  // r = square² · free with free squarefree.
  let mut square = 1;
  let mut free = 1;
  let mut p = 2;
  while p * p <= r {
    let mut e = 0;
    while r.is_multiple_of(p) {
      r /= p;
      e += 1;
    }
    square *= p.pow(e / 2);
    if e % 2 == 1 {
      free *= p;
    }
    p += 1;
  }
  (square, free * r)
}

impl<T: Coefficient> Scalar<T> {
  /// Zero.
  pub fn zero() -> Self { Self { terms: BTreeMap::new() } }

  /// One.
  pub fn one() -> Self { Self::rational(T::one()) }

  /// An element of the coefficient field.
  pub fn rational(value: T) -> Self { Self::from_cyclotomic(Cyclotomic::rational(value)) }

  /// An integer.
  pub fn integer(value: i64) -> Self { Self::rational(T::from_i64(value).expect("integer coefficient")) }

  /// The ratio `num/den`; `den` must be nonzero.
  pub fn ratio(num: i64, den: i64) -> Self {
    Self::rational(T::from_i64(num).expect("integer") / T::from_i64(den).expect("integer"))
  }

  /// A cyclotomic value with no square-root part.
  pub fn from_cyclotomic(c: Cyclotomic<T>) -> Self {
    let mut terms = BTreeMap::new();
    if !c.is_zero() {
      terms.insert(1, c);
    }
    Self { terms }
  }

  /// `ζ_n^k`.
  pub fn zeta(n: usize, k: i64) -> Self { Self::from_cyclotomic(Cyclotomic::zeta(n, k)) }

  /// `√r` for a positive integer `r` (square factors are extracted).
  pub fn sqrt(r: u64) -> Self {
    assert!(r > 0, "square root of zero");
    let (square, free) = squarefree_split(r);
    let mut terms = BTreeMap::new();
    terms.insert(free, Cyclotomic::rational(T::from_u64(square).expect("integer")));
    Self { terms }
  }

  /// `r^{-1/2}` for a positive integer `r`.
  pub fn inv_sqrt(r: u64) -> Self { Self::sqrt(r).scale(&(T::one() / T::from_u64(r).expect("integer"))) }

  /// `r^{e/2}` for a positive integer `r` and any integer `e`.
  pub fn sqrt_pow(r: u64, e: i64) -> Self {
    let base = if e >= 0 { Self::sqrt(r) } else { Self::inv_sqrt(r) };
    let mut acc = Self::one();
    for _ in 0..e.unsigned_abs() {
      acc = &acc * &base;
    }
    acc
  }

  /// Multiplies by a coefficient-field element.
  pub fn scale(&self, k: &T) -> Self {
    let mut out = Self::zero();
    for (&r, c) in &self.terms {
      out.insert(r, c.scale(k));
    }
    out
  }

  fn insert(&mut self, r: u64, c: Cyclotomic<T>) {
    let merged = match self.terms.remove(&r) {
      Some(old) => &old + &c,
      None => c,
    };
    if !merged.is_zero() {
      self.terms.insert(r, merged);
    }
  }

  /// Whether the value is exactly zero.
  pub fn is_zero(&self) -> bool { self.terms.values().all(Cyclotomic::is_zero) }

  /// The value as an element of the coefficient field, if it is one.
  pub fn as_rational(&self) -> Option<T> {
    match self.terms.len() {
      0 => Some(T::zero()),
      1 => self.terms.get(&1).and_then(Cyclotomic::as_rational),
      _ => None,
    }
  }

  /// The `(radicand, coefficient)` terms in increasing radicand order.
  pub fn terms(&self) -> impl Iterator<Item = (u64, &Cyclotomic<T>)> { self.terms.iter().map(|(&r, c)| (r, c)) }
}

impl<T: Coefficient + ToPrimitive> Scalar<T> {
  /// Floating-point approximation as `(re, im)`.
  pub fn to_complex_f64(&self) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for (&r, c) in &self.terms {
      let s = (r as f64).sqrt();
      for (k, a) in c.coeffs().iter().enumerate() {
        let a = a.to_f64().unwrap_or(f64::NAN) * s;
        let t = std::f64::consts::TAU * k as f64 / c.order() as f64;
        re += a * t.cos();
        im += a * t.sin();
      }
    }
    (re, im)
  }

  /// Human-readable decimal approximation.
  pub fn to_float_string(&self) -> String {
    let (re, im) = self.to_complex_f64();
    if im.abs() < 1e-12 {
      format!("{re:.12}")
    } else {
      format!("{re:.12} {} {:.12}i", if im < 0.0 { "-" } else { "+" }, im.abs())
    }
  }
}

impl<T: Coefficient> Default for Scalar<T> {
  fn default() -> Self { Self::zero() }
}

impl<T: Coefficient> PartialEq for Scalar<T> {
  fn eq(&self, other: &Self) -> bool { (self - other).is_zero() }
}

impl<T: Coefficient> Add for &Scalar<T> {
  type Output = Scalar<T>;
  fn add(self, rhs: Self) -> Scalar<T> {
    let mut out = self.clone();
    for (&r, c) in &rhs.terms {
      out.insert(r, c.clone());
    }
    out
  }
}

impl<T: Coefficient> Sub for &Scalar<T> {
  type Output = Scalar<T>;
  fn sub(self, rhs: Self) -> Scalar<T> { self + &(-rhs) }
}

impl<T: Coefficient> Neg for &Scalar<T> {
  type Output = Scalar<T>;
  fn neg(self) -> Scalar<T> { Scalar { terms: self.terms.iter().map(|(&r, c)| (r, -c)).collect() } }
}

impl<T: Coefficient> Mul for &Scalar<T> {
  type Output = Scalar<T>;
  fn mul(self, rhs: Self) -> Scalar<T> {
    let mut out = Scalar::zero();
    for (&a, x) in &self.terms {
      for (&b, y) in &rhs.terms {
        // √a·√b = g·√(ab/g²) for squarefree a, b with g = gcd(a, b).
        let g = a.gcd(&b);
        let r = (a / g) * (b / g);
        out.insert(r, (x * y).scale(&T::from_u64(g).expect("integer")));
      }
    }
    out
  }
}

macro_rules! forward_owned {
  ($($tr:ident $m:ident),*) => {$(
    impl<T: Coefficient> $tr for Scalar<T> {
      type Output = Scalar<T>;
      fn $m(self, rhs: Self) -> Scalar<T> { (&self).$m(&rhs) }
    }
  )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl<T: Coefficient> Neg for Scalar<T> {
  type Output = Scalar<T>;
  fn neg(self) -> Scalar<T> { -&self }
}

impl<T: Coefficient> std::iter::Sum for Scalar<T> {
  fn sum<I: Iterator<Item = Self>>(iter: I) -> Self { iter.fold(Self::zero(), |a, b| &a + &b) }
}

impl<T: Coefficient> std::iter::Product for Scalar<T> {
  fn product<I: Iterator<Item = Self>>(iter: I) -> Self { iter.fold(Self::one(), |a, b| &a * &b) }
}

impl<T: Coefficient> fmt::Display for Scalar<T> {
  /// Prints `a/b`, `a/b * zetaN^k`, parenthesised sums for multi-term coefficients, and
  /// a trailing ` * sqrt(r)` for nontrivial radicands.
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.terms.is_empty() {
      return write!(f, "0");
    }
    let parts: Vec<String> = self
      .terms
      .iter()
      .map(|(&r, c)| if r == 1 { c.to_string() } else { format!("{c} * sqrt({r})") })
      .collect();
    write!(f, "{}", parts.join(" + "))
  }
}

#[cfg(test)]
mod tests {
  use super::*;
  use num_rational::BigRational;

  type S = Scalar<BigRational>;

  #[test]
  fn cyclotomic_polynomials() {
    assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
    assert_eq!(cyclotomic_polynomial(2), vec![1, 1]);
    assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
    assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
  }

  #[test]
  fn zeta_two_is_minus_one() {
    assert_eq!(S::zeta(2, 1), S::integer(-1));
    assert_eq!(S::zeta(2, 1).to_string(), "-1");
  }

  #[test]
  fn roots_of_unity_sum_to_zero() {
    let s: S = (0..6).map(|k| S::zeta(6, k)).sum();
    assert!(s.is_zero());
    let s: S = (0..3).map(|k| S::zeta(3, k)).sum();
    assert!(s.is_zero());
  }

  #[test]
  fn mixed_orders_compare() {
    assert_eq!(S::zeta(4, 2), S::zeta(2, 1));
    assert_eq!(&S::zeta(6, 1) * &S::zeta(6, 1), S::zeta(3, 1));
  }

  #[test]
  fn square_roots_multiply() {
    assert_eq!(&S::sqrt(6) * &S::sqrt(6), S::integer(6));
    assert_eq!(&S::sqrt(2) * &S::sqrt(3), S::sqrt(6));
    assert_eq!(&S::inv_sqrt(2) * &S::sqrt(2), S::one());
    assert_eq!(S::sqrt(8), &S::integer(2) * &S::sqrt(2));
    assert_eq!(S::sqrt_pow(3, -2), S::ratio(1, 3));
  }

  #[test]
  fn printing() {
    assert_eq!(S::ratio(1, 2).to_string(), "1/2");
    assert_eq!(S::zero().to_string(), "0");
    assert_eq!(S::inv_sqrt(2).to_string(), "1/2 * sqrt(2)");
    assert_eq!(S::zeta(3, 1).to_string(), "1 * zeta3^1");
  }

  #[test]
  fn float_approximation() {
    let (re, im) = S::zeta(4, 1).to_complex_f64();
    assert!(re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12);
  }
}
