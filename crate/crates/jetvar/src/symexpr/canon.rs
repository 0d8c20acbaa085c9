//! Canonicalization: expansion into a polynomial over atoms.
//!
//! A `Poly` maps monomials to rational coefficients. Atoms are base
//! variables, jet variables, opaque atoms, transcendental subterms with
//! canonicalized arguments, and reciprocals of non-monomial subexpressions
//! (the last two are inert: no identities between them are recognized).

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use super::{Expr, Func, OpaqueAtom, Rational};
use crate::multiindex::MultiIndex;

/// An irreducible factor of a monomial. Derived `Ord` fixes the global
/// atom order used for sorting and display.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Atom {
    Base(usize),
    Jet(usize, MultiIndex),
    Opaque(OpaqueAtom),
    /// Elementary function of a canonicalized argument.
    Transcendental(Func, Expr),
    /// Reciprocal of a canonicalized non-monomial expression.
    Recip(Expr),
}

impl Atom {
    fn into_expr(self) -> Expr {
        match self {
            Atom::Base(i) => Expr::Base(i),
            Atom::Jet(a, n) => Expr::Jet(a, n),
            Atom::Opaque(at) => Expr::Opaque(at),
            Atom::Transcendental(f, arg) => Expr::Func(f, Box::new(arg)),
            Atom::Recip(e) => Expr::Pow(Box::new(e), -1),
        }
    }
}

/// Product of atoms with non-zero integer exponents, sorted by atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(crate) struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    fn unit() -> Self {
        Monomial(Vec::new())
    }

    fn atom(a: Atom) -> Self {
        Monomial(vec![(a, 1)])
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: Vec<(Atom, i32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    fn zero() -> Poly {
        Poly::default()
    }

    fn constant(c: Rational) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::unit(), c);
        p
    }

    fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    fn atom(a: Atom) -> Poly {
        let mut p = Poly::zero();
        p.add_term(Monomial::atom(a), Rational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    fn powi(&self, k: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse. Exact on single-monomial polynomials; other
    /// shapes become an inert `Recip` atom.
    fn invert(&self) -> Poly {
        if let Some((m, c)) = self.single_term() {
            let mut out = Poly::one();
            for (atom, e) in &m.0 {
                out = out.mul(&atom_power(atom, -e));
            }
            return out.mul(&Poly::constant(c.recip()));
        }
        Poly::atom(Atom::Recip(self.clone().into_expr()))
    }

    fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub(crate) fn from_expr(e: &Expr) -> Poly {
        match e {
            Expr::Num(r) => Poly::constant(r.clone()),
            Expr::Base(i) => Poly::atom(Atom::Base(*i)),
            Expr::Jet(a, n) => Poly::atom(Atom::Jet(*a, n.clone())),
            Expr::Opaque(at) => Poly::atom(Atom::Opaque(at.clone())),
            Expr::Add(xs) => xs
                .iter()
                .fold(Poly::zero(), |acc, x| acc.add(&Poly::from_expr(x))),
            Expr::Mul(xs) => xs
                .iter()
                .fold(Poly::one(), |acc, x| acc.mul(&Poly::from_expr(x))),
            Expr::Neg(x) => Poly::from_expr(x).neg(),
            Expr::Pow(base, k) => {
                let p = Poly::from_expr(base);
                match k.cmp(&0) {
                    std::cmp::Ordering::Equal => Poly::one(),
                    std::cmp::Ordering::Greater => p.powi(*k as u32),
                    std::cmp::Ordering::Less => p.invert().powi(k.unsigned_abs()),
                }
            }
            Expr::Func(f, arg) => {
                let a = Poly::from_expr(arg).into_expr();
                // Exact folds at rational fixed points only.
                if a.is_zero() && *f != Func::Ln {
                    return match f {
                        Func::Sin => Poly::zero(),
                        Func::Cos | Func::Exp => Poly::one(),
                        Func::Ln => unreachable!(),
                    };
                }
                if *f == Func::Ln {
                    if let Some(r) = a.rational_value() {
                        if r.is_one() {
                            return Poly::zero();
                        }
                    }
                }
                Poly::atom(Atom::Transcendental(*f, a))
            }
        }
    }

    /// Rebuild a canonical `Expr`: a sum of terms in descending monomial
    /// order, each a product of a rational coefficient and sorted powers of
    /// atoms, negative coefficients wrapped in `Neg`.
    pub(crate) fn into_expr(self) -> Expr {
        if self.terms.is_empty() {
            return Expr::zero();
        }
        let mut terms: Vec<Expr> = Vec::with_capacity(self.terms.len());
        for (m, c) in self.terms.into_iter().rev() {
            terms.push(term_expr(m, c));
        }
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        }
    }
}

/// `atom^e` as a polynomial, re-expanding reciprocal atoms that would end
/// up with a positive inner power so the normal form stays a fixed point.
fn atom_power(atom: &Atom, e: i32) -> Poly {
    if e == 0 {
        return Poly::one();
    }
    if let Atom::Recip(inner) = atom {
        if e < 0 {
            // (1/inner)^(-n) = inner^n: expand.
            return Poly::from_expr(inner).powi(e.unsigned_abs());
        }
    }
    let mut p = Poly::zero();
    p.add_term(Monomial(vec![(atom.clone(), e)]), Rational::one());
    p
}

fn term_expr(m: Monomial, c: Rational) -> Expr {
    let negative = c.is_negative();
    let mag = if negative { -c } else { c };
    let mut factors: Vec<Expr> = Vec::with_capacity(m.0.len() + 1);
    if !(mag.is_one() && !m.0.is_empty()) {
        factors.push(Expr::Num(mag));
    }
    for (atom, exp) in m.0 {
        let f = match atom.into_expr() {
            // Recip atoms render as `base^-1`; fold the monomial exponent in.
            Expr::Pow(b, e) => Expr::Pow(b, e * exp),
            other if exp == 1 => other,
            other => Expr::Pow(Box::new(other), exp),
        };
        factors.push(f);
    }
    let body = if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Mul(factors)
    };
    if negative {
        Expr::Neg(Box::new(body))
    } else {
        body
    }
}
