//! Exact symbolic scalar expressions.
//!
//! An [`Expr`] is always held in canonical form: a sum of monomials with
//! nonzero rational coefficients, each monomial a sorted product of atoms
//! raised to nonzero integer powers. Two expressions are equal exactly when
//! their canonical forms coincide, so `==` is structural equality.
//!
//! The conformal scalar `λ` is an opaque slot ([`Atom::Lam`]); `exp(λ)` is the
//! separate atom [`Atom::ExpLam`] whose integer exponent lets
//! `exp(λ)·exp(-λ)` cancel exactly. The concrete λ is supplied through a
//! [`Lambda`] when differentiating or evaluating.

mod diff;
mod eval;
mod parse;
mod print;
mod simplify;

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, Zero};
use thiserror::Error;

pub use eval::{numeric_equivalent, Equivalence, EvalError};
pub use parse::{parse_expr, parse_with_limit, ParseError};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("negative power of a sum is not representable: ({0})^{1}")]
    NegativePowerOfSum(String, i32),
    #[error("division by a non-monomial expression: {0}")]
    NonMonomialDivisor(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("lambda expression must not refer to the lambda slot: {0}")]
    SelfReferentialLambda(String),
}

/// Multiplicative building block of a monomial.
///
/// Variant order fixes the canonical ordering: variables by index, then the
/// named atoms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(usize),
    /// The conformal scalar λ itself.
    Lam,
    /// `exp(λ)`; its power in a monomial is the integer exponent of e^λ.
    ExpLam,
    /// `exp(u)`, always with power 1. Products merge arguments and integer
    /// multiples of λ are split out into [`Atom::ExpLam`].
    Exp(Expr),
    Sin(Expr),
    Cos(Expr),
}

/// Sorted product of atoms with nonzero integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Atom, i32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Atom, i32)> {
        self.0.iter().map(|(a, &p)| (a, p))
    }

    pub fn power_of(&self, atom: &Atom) -> i32 {
        self.0.get(atom).copied().unwrap_or(0)
    }

    fn single(atom: Atom, power: i32) -> Self {
        let mut m = Monomial::one();
        m.insert(atom, power);
        m
    }

    /// Multiply in `atom^power`, keeping the monomial canonical.
    fn insert(&mut self, atom: Atom, power: i32) {
        if power == 0 {
            return;
        }
        match atom {
            Atom::Exp(arg) => {
                let mut combined = arg.scale(&integer(power as i64));
                if let Some(old) = self.take_exp() {
                    combined = &combined + &old;
                }
                let (k, rest) = split_lambda_multiple(&combined);
                self.insert_plain(Atom::ExpLam, k);
                if !rest.is_zero() {
                    self.0.insert(Atom::Exp(rest), 1);
                }
            }
            other => self.insert_plain(other, power),
        }
    }

    fn insert_plain(&mut self, atom: Atom, power: i32) {
        if power == 0 {
            return;
        }
        let entry = self.0.entry(atom).or_insert(0);
        *entry += power;
        if *entry == 0 {
            self.0.retain(|_, p| *p != 0);
        }
    }

    fn take_exp(&mut self) -> Option<Expr> {
        let key = self.0.keys().find(|a| matches!(a, Atom::Exp(_)))?.clone();
        self.0.remove(&key);
        match key {
            Atom::Exp(arg) => Some(arg),
            _ => unreachable!(),
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (small, large) = if self.0.len() <= other.0.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = large.clone();
        for (atom, &p) in &small.0 {
            out.insert(atom.clone(), p);
        }
        out
    }

    pub fn pow(&self, k: i32) -> Monomial {
        let mut out = Monomial::one();
        for (atom, &p) in &self.0 {
            out.insert(atom.clone(), p * k);
        }
        out
    }

    /// Monomial with the given atom removed entirely.
    fn without(&self, atom: &Atom) -> Monomial {
        let mut out = self.clone();
        out.0.remove(atom);
        out
    }
}

/// Splits `u = k·λ + rest` when the coefficient of the bare `λ` monomial is
/// an integer `k`; otherwise returns `(0, u)`.
fn split_lambda_multiple(u: &Expr) -> (i32, Expr) {
    let lam = Monomial::single(Atom::Lam, 1);
    match u.terms.get(&lam) {
        Some(c) if c.is_integer() => {
            let k: i32 = c.to_integer().try_into().unwrap_or(0);
            if k == 0 {
                return (0, u.clone());
            }
            let mut rest = u.clone();
            rest.terms.remove(&lam);
            (k, rest)
        }
        _ => (0, u.clone()),
    }
}

/// Canonical symbolic expression. See the module docs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Expr::term(c, Monomial::one())
    }

    pub fn int(c: i64) -> Self {
        Expr::constant(integer(c))
    }

    pub fn var(index: usize) -> Self {
        Expr::atom(Atom::Var(index), 1)
    }

    pub fn lam() -> Self {
        Expr::atom(Atom::Lam, 1)
    }

    /// `exp(k·λ)`.
    pub fn exp_lam(k: i32) -> Self {
        Expr::atom(Atom::ExpLam, k)
    }

    pub fn exp(arg: Expr) -> Self {
        if arg.is_zero() {
            return Expr::one();
        }
        let mut m = Monomial::one();
        m.insert(Atom::Exp(arg), 1);
        Expr::term(Rational::one(), m)
    }

    pub fn sin(arg: Expr) -> Self {
        if arg.is_zero() {
            return Expr::zero();
        }
        if arg.leading_negative() {
            -Expr::atom(Atom::Sin(-arg), 1)
        } else {
            Expr::atom(Atom::Sin(arg), 1)
        }
    }

    pub fn cos(arg: Expr) -> Self {
        if arg.is_zero() {
            return Expr::one();
        }
        let arg = if arg.leading_negative() { -arg } else { arg };
        Expr::atom(Atom::Cos(arg), 1)
    }

    fn atom(atom: Atom, power: i32) -> Self {
        Expr::term(Rational::one(), Monomial::single(atom, power))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value of a constant expression (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single `(coefficient, monomial)` pair when the expression has
    /// exactly one term.
    pub fn single_term(&self) -> Option<(&Rational, &Monomial)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (c, m))
        } else {
            None
        }
    }

    fn leading_negative(&self) -> bool {
        self.terms.values().next().is_some_and(|c| c.is_negative())
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Integer power. Negative powers are only defined for single terms.
    pub fn pow(&self, k: i32) -> Result<Expr, SymError> {
        if k < 0 {
            let (c, m) = self
                .single_term()
                .ok_or_else(|| SymError::NegativePowerOfSum(self.to_string(), k))?;
            let inv = c.recip();
            let mut coeff = Rational::one();
            for _ in 0..(-k) {
                coeff *= &inv;
            }
            return Ok(Expr::term(coeff, m.pow(k)));
        }
        if let Some((c, m)) = self.single_term() {
            let mut coeff = Rational::one();
            for _ in 0..k {
                coeff *= c;
            }
            return Ok(Expr::term(coeff, m.pow(k)));
        }
        let mut out = Expr::one();
        let mut base = self.clone();
        let mut k = k as u32;
        while k > 0 {
            if k & 1 == 1 {
                out = &out * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        Ok(out)
    }

    /// Exact division by a single-term expression.
    pub fn div(&self, divisor: &Expr) -> Result<Expr, SymError> {
        if divisor.is_zero() {
            return Err(SymError::DivisionByZero);
        }
        let inv = divisor
            .pow(-1)
            .map_err(|_| SymError::NonMonomialDivisor(divisor.to_string()))?;
        Ok(self * &inv)
    }

    /// Largest variable index appearing anywhere, including inside atom
    /// arguments.
    pub fn max_var(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        self.visit_atoms(&mut |a| {
            if let Atom::Var(k) = a {
                best = Some(best.map_or(*k, |b| b.max(*k)));
            }
        });
        best
    }

    pub fn depends_on(&self, var: usize) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| found |= matches!(a, Atom::Var(k) if *k == var));
        found
    }

    /// True when the λ slot (bare or exponentiated) occurs.
    pub fn contains_lambda(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| found |= matches!(a, Atom::Lam | Atom::ExpLam));
        found
    }

    /// True when any sin/cos/exp-of-expression atom occurs.
    pub fn contains_transcendental(&self) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |a| found |= matches!(a, Atom::Exp(_) | Atom::Sin(_) | Atom::Cos(_)));
        found
    }

    fn visit_atoms(&self, f: &mut dyn FnMut(&Atom)) {
        for m in self.terms.keys() {
            for atom in m.0.keys() {
                f(atom);
                match atom {
                    Atom::Exp(u) | Atom::Sin(u) | Atom::Cos(u) => u.visit_atoms(f),
                    _ => {}
                }
            }
        }
    }

    /// Maximum total power of the given variables over all monomials.
    pub fn degree_in(&self, vars: &[usize]) -> i32 {
        self.terms
            .keys()
            .map(|m| {
                m.atoms()
                    .filter(|(a, _)| matches!(a, Atom::Var(k) if vars.contains(k)))
                    .map(|(_, p)| p)
                    .sum::<i32>()
            })
            .max()
            .unwrap_or(0)
    }

    /// Replaces every occurrence of variable `var` by `value`. Fails only if
    /// the variable carries a negative power and `value` is not a monomial.
    pub fn substitute(&self, var: usize, value: &Expr) -> Result<Expr, SymError> {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut acc = Expr::constant(c.clone());
            for (atom, p) in m.atoms() {
                let factor = match atom {
                    Atom::Var(k) if *k == var => value.pow(p)?,
                    Atom::Exp(u) => Expr::exp(u.substitute(var, value)?).pow(p)?,
                    Atom::Sin(u) => Expr::sin(u.substitute(var, value)?).pow(p)?,
                    Atom::Cos(u) => Expr::cos(u.substitute(var, value)?).pow(p)?,
                    other => Expr::atom(other.clone(), p),
                };
                acc = &acc * &factor;
            }
            out += acc;
        }
        Ok(out)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let (small, large) = if self.terms.len() <= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut out = large.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, rhs: Expr) -> Expr {
        self += rhs;
        self
    }
}

impl AddAssign for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(mut self) -> Expr {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

/// The user-supplied conformal scalar λ, a function of chart coordinates
/// that does not itself mention the λ slot.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Lambda(Expr);

impl Lambda {
    pub fn new(expr: Expr) -> Result<Self, SymError> {
        if expr.contains_lambda() {
            return Err(SymError::SelfReferentialLambda(expr.to_string()));
        }
        Ok(Lambda(expr))
    }

    pub fn zero() -> Self {
        Lambda(Expr::zero())
    }

    pub fn expr(&self) -> &Expr {
        &self.0
    }

    /// `λ ≡ 0` as a canonical form.
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// True when λ has no coordinate dependence.
    pub fn is_constant(&self) -> bool {
        self.0.as_constant().is_some()
    }

    /// The conformal weight `e^{kλ}`, collapsed to `1` when `λ ≡ 0`.
    pub fn weight(&self, k: i32) -> Expr {
        if self.is_zero() || k == 0 {
            Expr::one()
        } else {
            Expr::exp_lam(k)
        }
    }
}

/// Canonical simplification under `sin²u + cos²u = 1`. Idempotent.
pub fn simplify(e: &Expr) -> Expr {
    simplify::pythagorean(e)
}

/// Exact equality of canonical forms modulo `sin²u + cos²u = 1`.
pub fn expr_equal(a: &Expr, b: &Expr) -> bool {
    a == b || simplify::normal_form(a) == simplify::normal_form(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(k: usize) -> Expr {
        Expr::var(k)
    }

    #[test]
    fn binomial_square_matches_expansion() {
        let lhs = (&x(0) + &x(1)).pow(2).unwrap();
        let rhs =
            &(&x(0).pow(2).unwrap() + &(&Expr::int(2) * &(&x(0) * &x(1)))) + &x(1).pow(2).unwrap();
        assert!(expr_equal(&lhs, &rhs));
        assert!(!expr_equal(&x(0), &x(1)));
    }

    #[test]
    fn conformal_atoms_cancel() {
        let e = &(&Expr::exp_lam(1) * &Expr::exp_lam(-1)) * &x(0);
        assert_eq!(e, x(0));
        let viaexp = &Expr::exp(Expr::lam()) * &Expr::exp(-Expr::lam());
        assert!(viaexp.is_one());
    }

    #[test]
    fn exp_arguments_merge_and_split_lambda() {
        let half = Expr::lam().scale(&rational(1, 2));
        let e = &Expr::exp(half.clone()) * &Expr::exp(half);
        assert_eq!(e, Expr::exp_lam(1));
        let mixed = Expr::exp(&Expr::lam() + &x(1));
        let (c, m) = mixed.single_term().unwrap();
        assert!(c.is_one());
        assert_eq!(m.power_of(&Atom::ExpLam), 1);
        assert_eq!(m.power_of(&Atom::Exp(x(1))), 1);
        assert_eq!(
            Expr::exp(x(1)).pow(-2).unwrap(),
            Expr::exp(x(1).scale(&integer(-2)))
        );
    }

    #[test]
    fn trig_sign_normalisation() {
        assert_eq!(Expr::sin(-x(0)), -Expr::sin(x(0)));
        assert_eq!(Expr::cos(-x(0)), Expr::cos(x(0)));
        assert!(Expr::sin(Expr::zero()).is_zero());
        assert!(Expr::cos(Expr::zero()).is_one());
    }

    #[test]
    fn negative_power_of_sum_rejected() {
        let s = &x(0) + &x(1);
        assert!(matches!(
            s.pow(-1),
            Err(SymError::NegativePowerOfSum(_, -1))
        ));
        assert!(matches!(
            x(0).div(&Expr::zero()),
            Err(SymError::DivisionByZero)
        ));
        let q = x(1).div(&x(0).pow(2).unwrap()).unwrap();
        assert_eq!(&q * &x(0).pow(2).unwrap(), x(1));
    }

    #[test]
    fn lambda_rejects_self_reference() {
        assert!(Lambda::new(Expr::lam()).is_err());
        assert!(Lambda::new(x(0)).is_ok());
        assert!(Lambda::zero().weight(1).is_one());
        assert_eq!(Lambda::new(x(0)).unwrap().weight(-1), Expr::exp_lam(-1));
    }

    #[test]
    fn substitution_and_degree() {
        let e = &(&x(0) * &x(4)) + &x(5).pow(2).unwrap();
        assert_eq!(e.degree_in(&[4, 5]), 2);
        let s = e.substitute(5, &Expr::int(3)).unwrap();
        assert_eq!(s, &(&x(0) * &x(4)) + &Expr::int(9));
        assert!(e.depends_on(5));
        assert_eq!(e.max_var(), Some(5));
    }
}
