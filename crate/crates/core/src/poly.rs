//! Exact sparse polynomials in two variables.
//!
//! Every closed-form moment in this crate is a polynomial with integer (or,
//! for finite-`N` expectations, rational) coefficients in two formal
//! variables such as `(q, rho)` or `(q, t)`. Floating point only enters when
//! a polynomial is evaluated.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Zero};

/// Ring of coefficients usable in a [`BivariatePoly`].
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn to_f64(&self) -> f64;
}

impl Coefficient for i64 {
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Coefficient for i128 {
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Coefficient for Ratio<i128> {
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Exact rational number used by the finite-`N` expectation engine.
pub type Rational = Ratio<i128>;

/// Sparse polynomial `sum c[e1,e2] x^e1 y^e2`; zero coefficients are never stored.
#[derive(Clone, Debug)]
pub struct BivariatePoly<C = i64> {
    vars: [&'static str; 2],
    terms: BTreeMap<(u32, u32), C>,
}

/// Integer polynomial in `(q, rho)`, `(q, t)` or `q` alone.
pub type IntPoly = BivariatePoly<i64>;
/// Rational polynomial in `(q, rho)`.
pub type RatPoly = BivariatePoly<Rational>;

impl<C: Coefficient> BivariatePoly<C> {
    /// The zero polynomial over the variables `vars`. Use `""` as the second
    /// label for a univariate polynomial.
    pub fn zero(vars: [&'static str; 2]) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: [&'static str; 2], c: C) -> Self {
        Self::monomial(vars, 0, 0, c)
    }

    pub fn monomial(vars: [&'static str; 2], e1: u32, e2: u32, c: C) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(e1, e2, c);
        p
    }

    pub fn vars(&self) -> [&'static str; 2] {
        self.vars
    }

    /// Relabels the variables without touching the coefficients.
    pub fn with_vars(mut self, vars: [&'static str; 2]) -> Self {
        self.vars = vars;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c x^e1 y^e2`, dropping the entry if it cancels.
    pub fn add_term(&mut self, e1: u32, e2: u32, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&(e1, e2)) {
            Some(slot) => {
                let sum = slot.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&(e1, e2));
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert((e1, e2), c);
            }
        }
    }

    pub fn coeff(&self, e1: u32, e2: u32) -> C {
        self.terms.get(&(e1, e2)).cloned().unwrap_or_else(C::zero)
    }

    /// Terms in increasing `(e1, e2)` order.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &C)> + '_ {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    pub fn degree_first(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn degree_second(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.vars);
        for (&(a, b), v) in &self.terms {
            out.add_term(a, b, v.clone() * c.clone());
        }
        out
    }

    /// Multiplies by `x^d1 y^d2`.
    pub fn shift(&self, d1: u32, d2: u32) -> Self {
        Self {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| ((a + d1, b + d2), c.clone()))
                .collect(),
        }
    }

    /// Exact substitution of the second variable; the result has `e2 = 0` only.
    pub fn substitute_second(&self, value: &C) -> Self {
        let mut out = Self::zero([self.vars[0], ""]);
        for (&(a, b), c) in &self.terms {
            out.add_term(a, 0, c.clone() * pow(value, b));
        }
        out
    }

    /// Exact substitution of the first variable; the surviving variable is
    /// moved into the first slot.
    pub fn substitute_first(&self, value: &C) -> Self {
        let mut out = Self::zero([self.vars[1], ""]);
        for (&(a, b), c) in &self.terms {
            out.add_term(b, 0, c.clone() * pow(value, a));
        }
        out
    }

    /// Exact value at a point of the coefficient ring.
    pub fn eval_exact(&self, x: &C, y: &C) -> C {
        self.terms.iter().fold(C::zero(), |acc, (&(a, b), c)| {
            acc + c.clone() * pow(x, a) * pow(y, b)
        })
    }

    /// Floating-point value at `(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| c.to_f64() * powu(x, a) * powu(y, b))
            .sum()
    }

    /// Applies `f` to every coefficient, e.g. to lift an integer polynomial
    /// into the rationals.
    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> BivariatePoly<D> {
        let mut out = BivariatePoly::zero(self.vars);
        for (&(a, b), c) in &self.terms {
            out.add_term(a, b, f(c));
        }
        out
    }

    /// Whether every coefficient satisfies `pred`.
    pub fn all_coeffs(&self, pred: impl Fn(&C) -> bool) -> bool {
        self.terms.values().all(pred)
    }
}

impl IntPoly {
    /// Integer polynomial lifted to exact rationals.
    pub fn to_rational(&self) -> RatPoly {
        self.map_coeffs(|c| Rational::from_integer(i128::from(*c)))
    }
}

fn pow<C: Coefficient>(base: &C, exp: u32) -> C {
    let mut acc = C::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

pub(crate) fn powu(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

impl<C: Coefficient> PartialEq for BivariatePoly<C> {
    /// Compares coefficients only; variable labels are presentation.
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<C: Coefficient> Add for BivariatePoly<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<C: Coefficient> AddAssign for BivariatePoly<C> {
    fn add_assign(&mut self, rhs: Self) {
        for ((a, b), c) in rhs.terms {
            self.add_term(a, b, c);
        }
    }
}

impl<C: Coefficient> Neg for BivariatePoly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            vars: self.vars,
            terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }
}

impl<C: Coefficient> Sub for BivariatePoly<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: Coefficient> Mul for &BivariatePoly<C> {
    type Output = BivariatePoly<C>;
    fn mul(self, rhs: Self) -> BivariatePoly<C> {
        let mut out = BivariatePoly::zero(self.vars);
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term(a1 + a2, b1 + b2, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> Mul for BivariatePoly<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl<C: Coefficient> fmt::Display for BivariatePoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&(a, b), c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mut mono = String::new();
            for (label, e) in [(self.vars[0], a), (self.vars[1], b)] {
                match e {
                    0 => {}
                    1 => {
                        if !mono.is_empty() {
                            mono.push('*');
                        }
                        mono.push_str(label);
                    }
                    _ => {
                        if !mono.is_empty() {
                            mono.push('*');
                        }
                        mono.push_str(label);
                        mono.push('^');
                        mono.push_str(&alloc::format!("{e}"));
                    }
                }
            }
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "({c})*{mono}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QR: [&str; 2] = ["q", "rho"];

    #[test]
    fn cancellation_drops_terms() {
        let mut p = IntPoly::monomial(QR, 1, 2, 3);
        p.add_term(1, 2, -3);
        assert!(p.is_zero());
        assert_eq!(p.len(), 0);
    }

    #[test]
    fn product_of_binomials() {
        // (1 + rho)(1 + q) = 1 + q + rho + q rho
        let a = IntPoly::constant(QR, 1) + IntPoly::monomial(QR, 0, 1, 1);
        let b = IntPoly::constant(QR, 1) + IntPoly::monomial(QR, 1, 0, 1);
        let p = &a * &b;
        assert_eq!(p.len(), 4);
        assert_eq!(p.coeff(1, 1), 1);
        assert_eq!(p.eval(2.0, 3.0), 12.0);
    }

    #[test]
    fn substitution_is_exact() {
        // q + 2 q rho^2 at rho = -1 -> 3q
        let p = IntPoly::monomial(QR, 1, 0, 1) + IntPoly::monomial(QR, 1, 2, 2);
        let s = p.substitute_second(&-1);
        assert_eq!(s, IntPoly::monomial(["q", ""], 1, 0, 3));
        assert_eq!(p.substitute_first(&0), IntPoly::zero(QR));
    }

    #[test]
    fn display_is_readable() {
        let p = IntPoly::constant(QR, 2) + IntPoly::monomial(QR, 1, 0, 1);
        assert_eq!(alloc::format!("{p}"), "2 + q");
        let r = RatPoly::monomial(QR, 2, 1, Rational::new(3, 4));
        assert_eq!(alloc::format!("{r}"), "(3/4)*q^2*rho");
    }

    #[test]
    fn fast_power_matches_repeated_product() {
        for e in 0..12 {
            let mut naive = 1.0;
            for _ in 0..e {
                naive *= -0.7;
            }
            assert!((powu(-0.7, e) - naive).abs() < 1e-15);
        }
    }
}
