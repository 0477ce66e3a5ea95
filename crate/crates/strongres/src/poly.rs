use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::monomial::{self, Exp, MonomialOrder};
use crate::rational::{format_rational, gcd_of_numerators, lcm_of_denominators, Rational};

/// Polynomial ring Q[x1..xd] identified by its ordered variable names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ring {
    names: Vec<String>,
}

pub type RingRef = Arc<Ring>;

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl Ring {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<RingRef> {
        if names.is_empty() {
            return Err(Error::EmptyNames);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            if !valid_name(n) {
                return Err(Error::MalformedName(n.to_string()));
            }
            if !seen.insert(n.to_string()) {
                return Err(Error::DuplicateNames(n.to_string()));
            }
            out.push(n.to_string());
        }
        Ok(Arc::new(Ring { names: out }))
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Ring with `k` auxiliary variables prepended, named so that they cannot clash.
    pub fn with_prefix(&self, k: usize) -> RingRef {
        let mut names = Vec::with_capacity(k + self.names.len());
        let mut counter = 0usize;
        while names.len() < k {
            let cand = format!("_aux{counter}");
            counter += 1;
            if !self.names.contains(&cand) {
                names.push(cand);
            }
        }
        names.extend(self.names.iter().cloned());
        Arc::new(Ring { names })
    }

    /// Ring on the same names reordered by `perm`: new variable k is old variable perm[k].
    pub fn permuted(&self, perm: &[usize]) -> RingRef {
        Arc::new(Ring {
            names: perm.iter().map(|&i| self.names[i].clone()).collect(),
        })
    }

    /// Ring on a subset of the variables, in ascending index order.
    pub fn sub_ring(&self, keep: &[usize]) -> RingRef {
        self.permuted(keep)
    }
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Clone)]
pub struct Polynomial {
    ring: RingRef,
    terms: BTreeMap<Exp, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl Hash for Polynomial {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Polynomial {
    pub fn zero(ring: &RingRef) -> Self {
        Polynomial {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: &RingRef) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn constant(ring: &RingRef, c: Rational) -> Self {
        Self::monomial(ring, vec![0; ring.arity()], c)
    }

    pub fn var(ring: &RingRef, i: usize) -> Self {
        let mut e = vec![0; ring.arity()];
        e[i] = 1;
        Self::monomial(ring, e, Rational::one())
    }

    pub fn monomial(ring: &RingRef, exp: Exp, c: Rational) -> Self {
        assert_eq!(exp.len(), ring.arity());
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Polynomial {
            ring: ring.clone(),
            terms,
        }
    }

    pub fn from_terms(ring: &RingRef, it: impl IntoIterator<Item = (Exp, Rational)>) -> Self {
        let mut p = Self::zero(ring);
        for (e, c) in it {
            assert_eq!(e.len(), ring.arity());
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Exp, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn arity(&self) -> usize {
        self.ring.arity()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn is_nonzero_constant(&self) -> bool {
        !self.is_zero() && self.is_constant()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&vec![0; self.arity()])
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, e: &[u32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| monomial::degree(e)).max()
    }

    /// Lowest total degree of a term; the order at the origin.
    pub fn low_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| monomial::degree(e)).min()
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn is_free_of(&self, i: usize) -> bool {
        self.terms.keys().all(|e| e[i] == 0)
    }

    pub fn variables(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for e in self.terms.keys() {
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    s.insert(i);
                }
            }
        }
        s
    }

    pub fn leading_term(&self, order: MonomialOrder) -> Option<(&Exp, &Rational)> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp(a.0, b.0))
    }

    /// Terms sorted descending under `order`.
    pub fn sorted_terms(&self, order: MonomialOrder) -> Vec<(Exp, Rational)> {
        let mut v: Vec<(Exp, Rational)> =
            self.terms.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        v.sort_by(|a, b| order.cmp(&b.0, &a.0));
        v
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, e: &[u32], c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(f, x)| (monomial::mul(f, e), x * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(&self.ring);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                p.add_term(f, c * Rational::from_integer(BigInt::from(e[i])));
            }
        }
        p
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.arity());
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            total += t;
        }
        total
    }

    /// Substitutes x_i by images[i]; the result lives in the images' ring.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Self> {
        if images.len() != self.arity() {
            return Err(Error::ArityMismatch {
                expected: self.arity(),
                found: images.len(),
            });
        }
        let target = match images.first() {
            Some(p) => p.ring.clone(),
            None => return Err(Error::EmptyNames),
        };
        let mut powers: Vec<Vec<Polynomial>> = images.iter().map(|p| vec![Self::one(&target), p.clone()]).collect();
        let mut result = Self::zero(&target);
        for (e, c) in &self.terms {
            let mut t = Self::constant(&target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][k as usize];
            }
            result = &result + &t;
        }
        Ok(result)
    }

    /// Sets x_i to the constant `value`.
    pub fn eval_var(&self, i: usize, value: &Rational) -> Self {
        let mut p = Self::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut f = e.clone();
            let k = f[i];
            f[i] = 0;
            let v = if k == 0 {
                c.clone()
            } else {
                c * num_traits::pow(value.clone(), k as usize)
            };
            p.add_term(f, v);
        }
        p
    }

    /// Translation x -> x + point.
    pub fn translate(&self, point: &[Rational]) -> Self {
        let images: Vec<Polynomial> = (0..self.arity())
            .map(|i| &Self::var(&self.ring, i) + &Self::constant(&self.ring, point[i].clone()))
            .collect();
        self.substitute(&images).expect("arity matches")
    }

    /// Order of vanishing at a rational point; None for the zero polynomial.
    pub fn order_at(&self, point: &[Rational]) -> Option<u32> {
        if point.iter().all(|x| x.is_zero()) {
            return self.low_degree();
        }
        self.translate(point).low_degree()
    }

    /// Coefficients of x_i^k for k = 0..=deg, each free of x_i.
    pub fn coefficients_in(&self, i: usize) -> Vec<Polynomial> {
        let d = self.degree_in(i) as usize;
        let mut out = vec![Self::zero(&self.ring); d + 1];
        for (e, c) in &self.terms {
            let k = e[i] as usize;
            let mut f = e.clone();
            f[i] = 0;
            out[k].add_term(f, c.clone());
        }
        out
    }

    /// Minimum over terms of the summed exponents of the variables in `vars`.
    pub fn order_along(&self, vars: &[usize]) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| vars.iter().map(|&i| e[i]).sum())
            .min()
    }

    /// Componentwise minimum exponent over all terms.
    pub fn monomial_content(&self) -> Exp {
        let mut it = self.terms.keys();
        let mut m = match it.next() {
            Some(e) => e.clone(),
            None => return vec![0; self.arity()],
        };
        for e in it {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
        }
        m
    }

    /// Divides by the monomial x^e, which must divide every term.
    pub fn div_monomial(&self, e: &[u32]) -> Self {
        Polynomial {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(f, c)| (monomial::quotient(f, e), c.clone()))
                .collect(),
        }
    }

    /// Integer primitive form with positive grevlex leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = lcm_of_denominators(self.terms.values());
        let scaled: Vec<Rational> = self
            .terms
            .values()
            .map(|c| c * Rational::from_integer(l.clone()))
            .collect();
        let g = gcd_of_numerators(&scaled);
        let mut factor = Rational::new(l, g);
        let lead = self.leading_term(MonomialOrder::Grevlex).expect("nonzero").1;
        if lead.is_negative() {
            factor = -factor;
        }
        self.scale(&factor)
    }

    pub fn monic(&self, order: MonomialOrder) -> Self {
        match self.leading_term(order) {
            Some((_, c)) => self.scale(&(Rational::one() / c)),
            None => self.clone(),
        }
    }

    /// Exact quotient self / g when g divides self.
    pub fn div_exact(&self, g: &Polynomial) -> Option<Self> {
        if g.is_zero() {
            return None;
        }
        let order = MonomialOrder::Lex;
        let (ge, gc) = g.leading_term(order).map(|(e, c)| (e.clone(), c.clone()))?;
        let mut rem = self.clone();
        let mut q = Self::zero(&self.ring);
        while let Some((e, c)) = rem.leading_term(order).map(|(e, c)| (e.clone(), c.clone())) {
            if !monomial::divides(&ge, &e) {
                return None;
            }
            let m = monomial::quotient(&e, &ge);
            let k = c / &gc;
            rem = &rem - &g.mul_monomial(&m, &k);
            q.add_term(m, k);
        }
        Some(q)
    }

    /// Moves the polynomial into `ring`, sending variable i to variable map[i].
    pub fn map_into(&self, ring: &RingRef, map: &[usize]) -> Self {
        let mut p = Self::zero(ring);
        for (e, c) in &self.terms {
            let mut f = vec![0; ring.arity()];
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    f[map[i]] += k;
                }
            }
            p.add_term(f, c.clone());
        }
        p
    }

    /// Moves the polynomial into a sub-ring; `keep[k]` is the old index of new variable k.
    /// Returns None if a dropped variable occurs.
    pub fn restrict_into(&self, ring: &RingRef, keep: &[usize]) -> Option<Self> {
        let mut p = Self::zero(ring);
        for (e, c) in &self.terms {
            let mut used = 0;
            let f: Exp = keep.iter().map(|&i| e[i]).collect();
            for &i in keep {
                used += e[i];
            }
            if used != monomial::degree(e) {
                return None;
            }
            p.add_term(f, c.clone());
        }
        Some(p)
    }

    /// Writes self = c * x_i + h with c a nonzero constant and h free of x_i.
    pub fn linear_in(&self, i: usize) -> Option<(Rational, Polynomial)> {
        if self.degree_in(i) != 1 {
            return None;
        }
        let co = self.coefficients_in(i);
        if !co[1].is_nonzero_constant() {
            return None;
        }
        Some((co[1].constant_term(), co[0].clone()))
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let (mut big, small) = if self.terms.len() >= rhs.terms.len() {
            (self.clone(), rhs)
        } else {
            (rhs.clone(), self)
        };
        for (e, c) in &small.terms {
            big.add_term(e.clone(), c.clone());
        }
        big
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c.clone());
        }
        p
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(&self.ring);
        for (e, c) in &self.terms {
            for (f, d) in &rhs.terms {
                p.add_term(monomial::mul(e, f), c * d);
            }
        }
        p
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms = self.sorted_terms(MonomialOrder::Grevlex);
        for (k, (e, c)) in terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors = Vec::new();
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => factors.push(self.ring.name(i).to_string()),
                    _ => factors.push(format!("{}^{}", self.ring.name(i), x)),
                }
            }
            if factors.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(&abs), factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn ring3() -> RingRef {
        Ring::new(&["x1", "x2", "x3"]).unwrap()
    }

    #[test]
    fn ring_validation() {
        assert_eq!(Ring::new::<&str>(&[]), Err(Error::EmptyNames));
        assert_eq!(
            Ring::new(&["x", "x"]),
            Err(Error::DuplicateNames("x".into()))
        );
        assert!(matches!(Ring::new(&["1x"]), Err(Error::MalformedName(_))));
        let r = ring3();
        assert_eq!(r.index_of("x2"), Some(1));
        assert_eq!(r.with_prefix(2).arity(), 5);
    }

    #[test]
    fn display_orders_terms_by_grevlex() {
        let r = ring3();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let p = &(&x2.pow(3) + &(&x2 * &x3)) - &x3.scale(&ratio(1, 2));
        assert_eq!(p.to_string(), "x2^3 + x2*x3 - 1/2*x3");
        assert_eq!((-&x1).to_string(), "-x1");
        assert_eq!(Polynomial::zero(&r).to_string(), "0");
    }

    #[test]
    fn substitution_and_derivative() {
        let r = ring3();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let f = &(&x2.pow(3) + &x3.pow(3)) + &(&x2 * &x3);
        let img = vec![x1.clone(), &x1 * &x2, &x1 * &x3];
        let g = f.substitute(&img).unwrap();
        let expected = x1.pow(2).mul_monomial(&[0, 0, 0], &rat(1));
        assert!(g.div_exact(&expected).is_some());
        assert_eq!(f.derivative(1), &x2.pow(2).scale(&rat(3)) + &x3);
        assert_eq!(f.order_at(&[rat(0), rat(0), rat(0)]), Some(2));
        assert_eq!(f.order_along(&[1, 2]), Some(2));
    }

    #[test]
    fn primitive_and_exact_division() {
        let r = ring3();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let p = (&x1.scale(&ratio(-2, 3)) + &x2.scale(&ratio(4, 3))).primitive();
        assert_eq!(p.to_string(), "x1 - 2*x2");
        let a = &x1 + &x2;
        let b = &x1 - &x2;
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!((&prod + &x1).div_exact(&a), None);
    }

    #[test]
    fn linear_in_detects_graphs() {
        let r = ring3();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let p = &x1.scale(&rat(2)) + &x2.pow(2);
        let (c, h) = p.linear_in(0).unwrap();
        assert_eq!(c, rat(2));
        assert_eq!(h, x2.pow(2));
        assert!((&x1 * &x2).linear_in(0).is_none());
    }
}
