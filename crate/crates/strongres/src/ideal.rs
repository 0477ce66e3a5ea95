use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_traits::One;

use crate::automorphism::Automorphism;
use crate::error::{Error, Result};
use crate::groebner::GroebnerBasis;
use crate::monomial::MonomialOrder;
use crate::poly::{Polynomial, RingRef};
use crate::rational::Rational;

/// Ideal of Q[x] given by generators, with a lazily computed grevlex basis.
#[derive(Clone)]
pub struct Ideal {
    ring: RingRef,
    gens: Vec<Polynomial>,
    gb: OnceLock<GroebnerBasis>,
}

impl fmt::Debug for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

fn embed(p: &Polynomial, target: &RingRef, offset: usize) -> Polynomial {
    let map: Vec<usize> = (0..p.arity()).map(|i| i + offset).collect();
    p.map_into(target, &map)
}

fn determinant(m: &[Vec<Polynomial>]) -> Polynomial {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let ring = m[0][0].ring().clone();
    let mut total = Polynomial::zero(&ring);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * &determinant(&minor);
        total = if j % 2 == 0 { &total + &term } else { &total - &term };
    }
    total
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub(crate) fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    combinations(n, k)
}

impl Ideal {
    pub fn new(ring: &RingRef, gens: Vec<Polynomial>) -> Self {
        let mut seen = BTreeSet::new();
        let gens: Vec<Polynomial> = gens
            .into_iter()
            .filter(|g| !g.is_zero())
            .filter(|g| seen.insert(g.primitive().to_string()))
            .collect();
        Ideal {
            ring: ring.clone(),
            gens,
            gb: OnceLock::new(),
        }
    }

    pub fn zero(ring: &RingRef) -> Self {
        Self::new(ring, Vec::new())
    }

    pub fn unit(ring: &RingRef) -> Self {
        Self::new(ring, vec![Polynomial::one(ring)])
    }

    pub fn principal(f: Polynomial) -> Self {
        let ring = f.ring().clone();
        Self::new(&ring, vec![f])
    }

    /// Ideal generated by the listed coordinates.
    pub fn coordinates(ring: &RingRef, vars: &[usize]) -> Self {
        Self::new(ring, vars.iter().map(|&i| Polynomial::var(ring, i)).collect())
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn groebner(&self) -> &GroebnerBasis {
        self.gb
            .get_or_init(|| GroebnerBasis::compute(&self.ring, &self.gens, MonomialOrder::Grevlex))
    }

    /// Reduced grevlex basis as an ideal with canonical generators.
    pub fn reduced(&self) -> Ideal {
        let gb = self.groebner().clone();
        let gens = gb.polynomials();
        let cell = OnceLock::new();
        let _ = cell.set(gb);
        Ideal {
            ring: self.ring.clone(),
            gens,
            gb: cell,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.gens.iter().any(|g| g.is_nonzero_constant()) || self.groebner().is_unit()
    }

    pub fn is_proper(&self) -> bool {
        !self.is_unit()
    }

    pub fn contains(&self, f: &Polynomial) -> bool {
        if f.is_zero() {
            return true;
        }
        if self.is_zero() {
            return false;
        }
        self.groebner().contains(f)
    }

    pub fn contains_ideal(&self, other: &Ideal) -> bool {
        other.gens.iter().all(|g| self.contains(g))
    }

    pub fn equals(&self, other: &Ideal) -> bool {
        self.contains_ideal(other) && other.contains_ideal(self)
    }

    pub fn sum(&self, other: &Ideal) -> Ideal {
        let mut g = self.gens.clone();
        g.extend(other.gens.iter().cloned());
        Ideal::new(&self.ring, g)
    }

    pub fn with(&self, extra: &[Polynomial]) -> Ideal {
        let mut g = self.gens.clone();
        g.extend(extra.iter().cloned());
        Ideal::new(&self.ring, g)
    }

    pub fn product(&self, other: &Ideal) -> Ideal {
        let mut g = Vec::new();
        for a in &self.gens {
            for b in &other.gens {
                g.push(a * b);
            }
        }
        Ideal::new(&self.ring, g)
    }

    pub fn power(&self, k: u32) -> Ideal {
        let mut r = Ideal::unit(&self.ring);
        for _ in 0..k {
            r = r.product(self).reduced();
        }
        r
    }

    pub fn scale_by(&self, f: &Polynomial) -> Ideal {
        Ideal::new(&self.ring, self.gens.iter().map(|g| g * f).collect())
    }

    /// Generators of the ideal intersected with the subring on the variables outside `vars`.
    pub fn eliminate(&self, vars: &[usize]) -> Ideal {
        let d = self.ring.arity();
        let elim: BTreeSet<usize> = vars.iter().copied().collect();
        let mut perm: Vec<usize> = elim.iter().copied().collect();
        perm.extend((0..d).filter(|i| !elim.contains(i)));
        let mut inv = vec![0; d];
        for (k, &i) in perm.iter().enumerate() {
            inv[i] = k;
        }
        let pr = self.ring.permuted(&perm);
        let mapped: Vec<Polynomial> = self.gens.iter().map(|g| g.map_into(&pr, &inv)).collect();
        let gb = GroebnerBasis::compute(&pr, &mapped, MonomialOrder::Block { split: elim.len() });
        let keep: Vec<Polynomial> = gb
            .polynomials()
            .into_iter()
            .filter(|p| (0..elim.len()).all(|k| p.is_free_of(k)))
            .map(|p| p.map_into(&self.ring, &perm))
            .collect();
        Ideal::new(&self.ring, keep)
    }

    /// Eliminates auxiliary prefix variables of a larger ring and returns the result in `base`.
    fn eliminate_prefix(ext: &RingRef, gens: Vec<Polynomial>, k: usize, base: &RingRef) -> Ideal {
        let gb = GroebnerBasis::compute(ext, &gens, MonomialOrder::Block { split: k });
        let keep: Vec<usize> = (k..ext.arity()).collect();
        let out: Vec<Polynomial> = gb
            .polynomials()
            .into_iter()
            .filter_map(|p| p.restrict_into(base, &keep))
            .collect();
        Ideal::new(base, out)
    }

    pub fn intersect(&self, other: &Ideal) -> Ideal {
        if self.is_zero() || other.is_zero() {
            return Ideal::zero(&self.ring);
        }
        if self.is_unit() {
            return other.clone();
        }
        if other.is_unit() {
            return self.clone();
        }
        let ext = self.ring.with_prefix(1);
        let t = Polynomial::var(&ext, 0);
        let one_minus_t = &Polynomial::one(&ext) - &t;
        let mut gens = Vec::new();
        for g in &self.gens {
            gens.push(&t * &embed(g, &ext, 1));
        }
        for g in &other.gens {
            gens.push(&one_minus_t * &embed(g, &ext, 1));
        }
        Self::eliminate_prefix(&ext, gens, 1, &self.ring)
    }

    /// (self : g).
    pub fn quotient_by(&self, g: &Polynomial) -> Ideal {
        if g.is_zero() || self.contains(g) {
            return Ideal::unit(&self.ring);
        }
        if g.is_nonzero_constant() {
            return self.clone();
        }
        let inter = self.intersect(&Ideal::principal(g.clone()));
        let gens = inter
            .gens
            .iter()
            .map(|h| h.div_exact(g).expect("element of <g> is divisible by g"))
            .collect();
        Ideal::new(&self.ring, gens)
    }

    /// (self : other).
    pub fn colon(&self, other: &Ideal) -> Ideal {
        let mut acc = Ideal::unit(&self.ring);
        for g in &other.gens {
            acc = acc.intersect(&self.quotient_by(g));
        }
        acc
    }

    /// Saturation with the least exponent N at which (self : other^N) stabilises.
    pub fn saturate(&self, other: &Ideal) -> (Ideal, u32) {
        let mut cur = self.reduced();
        let mut n = 0u32;
        loop {
            let next = cur.colon(other).reduced();
            if next.equals(&cur) {
                return (cur, n);
            }
            cur = next;
            n += 1;
        }
    }

    pub fn saturate_by(&self, f: &Polynomial) -> (Ideal, u32) {
        self.saturate(&Ideal::principal(f.clone()))
    }

    pub fn radical_member(&self, f: &Polynomial) -> bool {
        if self.contains(f) {
            return true;
        }
        let ext = self.ring.with_prefix(1);
        let t = Polynomial::var(&ext, 0);
        let mut gens: Vec<Polynomial> = self.gens.iter().map(|g| embed(g, &ext, 1)).collect();
        gens.push(&Polynomial::one(&ext) - &(&t * &embed(f, &ext, 1)));
        GroebnerBasis::compute(&ext, &gens, MonomialOrder::Grevlex).is_unit()
    }

    /// V(self) is contained in V(other).
    pub fn radical_contains(&self, other: &Ideal) -> bool {
        other.gens.iter().all(|g| self.radical_member(g))
    }

    pub fn same_radical(&self, other: &Ideal) -> bool {
        self.radical_contains(other) && other.radical_contains(self)
    }

    /// Krull dimension of Q[x]/I; -1 for the unit ideal.
    pub fn dimension(&self) -> i64 {
        let d = self.ring.arity();
        if self.is_zero() {
            return d as i64;
        }
        if self.is_unit() {
            return -1;
        }
        let supports: Vec<u64> = self
            .groebner()
            .leading_monomials()
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .fold(0u64, |acc, (i, _)| acc | (1 << i))
            })
            .collect();
        let mut best = 0;
        for mask in 0u64..(1u64 << d) {
            let size = mask.count_ones();
            if size > best && supports.iter().all(|s| s & !mask != 0) {
                best = size;
            }
        }
        best as i64
    }

    /// The ideal plus all first partial derivatives of its generators.
    pub fn delta(&self) -> Ideal {
        let mut g = self.gens.clone();
        for f in &self.gens {
            for i in 0..self.ring.arity() {
                g.push(f.derivative(i));
            }
        }
        Ideal::new(&self.ring, g)
    }

    pub fn delta_power(&self, s: u32) -> Ideal {
        let mut cur = self.clone();
        for _ in 0..s {
            if cur.is_unit() {
                return Ideal::unit(&self.ring);
            }
            cur = cur.delta().reduced();
        }
        cur
    }

    /// Generators of self together with derivatives of order up to s, without basis reduction.
    pub fn delta_power_generators(&self, s: u32) -> Vec<Polynomial> {
        let mut all: Vec<Polynomial> = self.gens.clone();
        let mut layer = self.gens.clone();
        let mut seen: BTreeSet<String> = all.iter().map(|p| p.primitive().to_string()).collect();
        for _ in 0..s {
            let mut next = Vec::new();
            for f in &layer {
                for i in 0..self.ring.arity() {
                    let d = f.derivative(i);
                    if !d.is_zero() && seen.insert(d.primitive().to_string()) {
                        next.push(d);
                    }
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        all
    }

    /// Least s with Delta^s(self) not inside `prime`; None for the zero ideal.
    pub fn order_along(&self, prime: &Ideal) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let mut s = 0;
        let mut cur = self.clone();
        while prime.contains_ideal(&cur) {
            s += 1;
            cur = cur.delta().reduced();
        }
        Some(s)
    }

    /// Largest m with Delta^(m-1)(self) + s proper, and that locus ideal.
    pub fn max_order_on(&self, s: &Ideal) -> (u32, Ideal) {
        if self.is_unit() || self.sum(s).is_unit() {
            return (0, s.clone());
        }
        let mut m = 1;
        let mut cur = self.reduced();
        loop {
            let next = cur.delta().reduced();
            if next.sum(s).is_unit() {
                return (m, cur.sum(s));
            }
            cur = next;
            m += 1;
        }
    }

    /// Order of the ideal at a rational point; None for the zero ideal.
    pub fn order_at(&self, point: &[Rational]) -> Option<u32> {
        self.gens.iter().filter_map(|g| g.order_at(point)).min()
    }

    pub fn vanishes_at(&self, point: &[Rational]) -> bool {
        self.gens.iter().all(|g| g.evaluate(point) == Rational::from_integer(0.into()))
    }

    pub fn substitute(&self, images: &[Polynomial]) -> Result<Ideal> {
        let ring = images.first().map(|p| p.ring().clone()).ok_or(Error::EmptyNames)?;
        let gens = self
            .gens
            .iter()
            .map(|g| g.substitute(images))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ideal::new(&ring, gens))
    }

    pub fn apply(&self, phi: &Automorphism) -> Ideal {
        Ideal::new(&self.ring, phi.apply_all(&self.gens))
    }

    /// Jacobian criterion for an ideal of pure codimension c: returns smoothness and the
    /// obstruction ideal self + (c x c minors).
    pub fn jacobian_smoothness(&self, c: usize) -> Result<(bool, Ideal)> {
        let d = self.ring.arity();
        let dim = self.dimension();
        if dim != d as i64 - c as i64 {
            return Err(Error::DimensionMismatch {
                expected: d as i64 - c as i64,
                found: dim,
            });
        }
        if c == 0 {
            return Ok((true, Ideal::unit(&self.ring)));
        }
        let gens = self.reduced().gens;
        let jac: Vec<Vec<Polynomial>> = gens
            .iter()
            .map(|g| (0..d).map(|i| g.derivative(i)).collect())
            .collect();
        let mut minors = Vec::new();
        for rows in combinations(gens.len(), c) {
            for cols in combinations(d, c) {
                let m: Vec<Vec<Polynomial>> = rows
                    .iter()
                    .map(|&r| cols.iter().map(|&k| jac[r][k].clone()).collect())
                    .collect();
                let det = determinant(&m);
                if det.is_nonzero_constant() {
                    return Ok((true, Ideal::unit(&self.ring)));
                }
                minors.push(det);
            }
        }
        let obstruction = self.with(&minors);
        Ok((obstruction.is_unit(), obstruction))
    }

    /// Moves the ideal into `ring`, sending variable i to map[i].
    pub fn map_into(&self, ring: &RingRef, map: &[usize]) -> Ideal {
        Ideal::new(ring, self.gens.iter().map(|g| g.map_into(ring, map)).collect())
    }

    /// Sets the listed coordinates to zero.
    pub fn restrict_zero(&self, vars: &[usize]) -> Ideal {
        let zero = Rational::from_integer(0.into());
        let gens = self
            .gens
            .iter()
            .map(|g| vars.iter().fold(g.clone(), |acc, &i| acc.eval_var(i, &zero)))
            .collect();
        Ideal::new(&self.ring, gens)
    }

    pub fn is_free_of(&self, vars: &[usize]) -> bool {
        self.gens.iter().all(|g| vars.iter().all(|&i| g.is_free_of(i)))
    }

    /// Product of the coordinate monomial x^e with the ideal.
    pub fn times_monomial(&self, e: &[u32]) -> Ideal {
        Ideal::new(
            &self.ring,
            self.gens.iter().map(|g| g.mul_monomial(e, &Rational::one())).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;
    use crate::rational::rat;

    fn setup() -> (RingRef, Polynomial, Polynomial, Polynomial) {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        (r, x1, x2, x3)
    }

    #[test]
    fn dimension_of_standard_examples() {
        let (r, x1, x2, x3) = setup();
        assert_eq!(Ideal::new(&r, vec![x1.clone(), x2.clone()]).dimension(), 1);
        assert_eq!(Ideal::unit(&r).dimension(), -1);
        assert_eq!(Ideal::zero(&r).dimension(), 3);
        assert_eq!(Ideal::new(&r, vec![&x1 * &x2, &x1 * &x3]).dimension(), 2);
    }

    #[test]
    fn saturation_exponents() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let i = Ideal::principal(&x1.pow(2) * &x2);
        let (s, n) = i.saturate(&Ideal::principal(x1.clone()));
        assert!(s.equals(&Ideal::principal(x2.clone())));
        assert_eq!(n, 2);
        let (s1, n1) = i.saturate(&Ideal::unit(&r));
        assert!(s1.equals(&i));
        assert_eq!(n1, 0);
    }

    #[test]
    fn intersection_and_colon() {
        let (r, x1, x2, _) = setup();
        let a = Ideal::principal(x1.clone());
        let b = Ideal::principal(x2.clone());
        assert!(a.intersect(&b).equals(&Ideal::principal(&x1 * &x2)));
        let c = Ideal::new(&r, vec![x1.pow(2), &x1 * &x2]);
        assert!(c.quotient_by(&x1).equals(&Ideal::new(&r, vec![x1.clone(), x2.clone()])));
    }

    #[test]
    fn radical_membership() {
        let (r, x1, x2, _) = setup();
        let i = Ideal::new(&r, vec![x1.pow(2), x2.pow(3)]);
        assert!(i.radical_member(&x1));
        assert!(!i.contains(&x1));
        assert!(!i.radical_member(&(&x1 + &Polynomial::one(&r))));
    }

    #[test]
    fn orders() {
        let (r, x1, x2, x3) = setup();
        let j = Ideal::principal(&x1.pow(2) * &x2);
        assert_eq!(j.order_along(&Ideal::principal(x1.clone())), Some(2));
        assert_eq!(j.order_along(&Ideal::new(&r, vec![x1.clone(), x2.clone()])), Some(3));
        let f = &(&x2.pow(3) + &x3.pow(3)) + &(&x2 * &x3);
        let (m, _) = Ideal::principal(f).max_order_on(&Ideal::zero(&r));
        assert_eq!(m, 2);
        assert_eq!(j.order_at(&[rat(0), rat(1), rat(0)]), Some(2));
    }

    #[test]
    fn jacobian_examples() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let (ok, _) = Ideal::new(&r, vec![x1.clone(), x2.clone()])
            .jacobian_smoothness(2)
            .unwrap();
        assert!(ok);
        let (ok, obstruction) = Ideal::new(&r, vec![x1.pow(2), x2.clone()])
            .jacobian_smoothness(2)
            .unwrap();
        assert!(!ok);
        assert!(obstruction.equals(&Ideal::new(&r, vec![x1.clone(), x2.clone()])));
        assert!(matches!(
            Ideal::principal(x1.clone()).jacobian_smoothness(2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn delta_is_generator_independent() {
        let (r, x1, x2, _) = setup();
        let a = Ideal::new(&r, vec![&x1.pow(2) + &x2.pow(3), x2.pow(2)]);
        let b = Ideal::new(&r, vec![&(&x1.pow(2) + &x2.pow(3)) + &x2.pow(2), x2.pow(2).scale(&rat(5))]);
        assert!(a.delta().equals(&b.delta()));
    }
}
