use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::monomial::{self, Exp, MonomialOrder};
use crate::poly::{Polynomial, RingRef};
use crate::rational::Rational;

type Terms = Vec<(Exp, Rational)>;

fn key(order: MonomialOrder, e: &[u32]) -> Vec<i64> {
    fn grev(out: &mut Vec<i64>, e: &[u32]) {
        out.push(monomial::degree(e) as i64);
        out.extend(e.iter().rev().map(|&x| -(x as i64)));
    }
    let mut out = Vec::with_capacity(e.len() + 2);
    match order {
        MonomialOrder::Grevlex => grev(&mut out, e),
        MonomialOrder::Lex => out.extend(e.iter().map(|&x| x as i64)),
        MonomialOrder::Block { split } => {
            let s = split.min(e.len());
            grev(&mut out, &e[..s]);
            grev(&mut out, &e[s..]);
        }
    }
    out
}

/// Reduced Groebner basis under a fixed monomial order; every element is monic.
#[derive(Debug, Clone)]
pub struct GroebnerBasis {
    ring: RingRef,
    order: MonomialOrder,
    polys: Vec<Terms>,
}

fn monic(mut t: Terms) -> Terms {
    if let Some((_, c)) = t.first() {
        let inv = Rational::one() / c;
        for (_, x) in t.iter_mut() {
            *x *= &inv;
        }
    }
    t
}

fn to_terms(p: &Polynomial, order: MonomialOrder) -> Terms {
    p.sorted_terms(order)
}

fn reduce_terms(order: MonomialOrder, f: Terms, basis: &[&Terms]) -> Terms {
    let mut work: BTreeMap<Vec<i64>, (Exp, Rational)> = BTreeMap::new();
    for (e, c) in f {
        work.insert(key(order, &e), (e, c));
    }
    let mut result = Vec::new();
    while let Some((_, (e, c))) = work.pop_last() {
        match basis.iter().find(|g| monomial::divides(&g[0].0, &e)) {
            Some(g) => {
                let m = monomial::quotient(&e, &g[0].0);
                for (ge, gc) in g.iter().skip(1) {
                    let ne = monomial::mul(&m, ge);
                    let k = key(order, &ne);
                    let delta = -(&c * gc);
                    match work.entry(k) {
                        std::collections::btree_map::Entry::Vacant(v) => {
                            v.insert((ne, delta));
                        }
                        std::collections::btree_map::Entry::Occupied(mut o) => {
                            o.get_mut().1 += delta;
                            if o.get().1.is_zero() {
                                o.remove();
                            }
                        }
                    }
                }
            }
            None => result.push((e, c)),
        }
    }
    result
}

fn s_poly(order: MonomialOrder, f: &Terms, g: &Terms) -> Terms {
    let l = monomial::lcm(&f[0].0, &g[0].0);
    let mf = monomial::quotient(&l, &f[0].0);
    let mg = monomial::quotient(&l, &g[0].0);
    let mut work: BTreeMap<Vec<i64>, (Exp, Rational)> = BTreeMap::new();
    for (e, c) in f.iter().skip(1) {
        let ne = monomial::mul(&mf, e);
        work.insert(key(order, &ne), (ne, c.clone()));
    }
    for (e, c) in g.iter().skip(1) {
        let ne = monomial::mul(&mg, e);
        let k = key(order, &ne);
        let entry = work.entry(k).or_insert_with(|| (ne, Rational::zero()));
        entry.1 -= c;
    }
    work.into_values().rev().filter(|(_, c)| !c.is_zero()).collect()
}

struct Builder {
    order: MonomialOrder,
    polys: Vec<Terms>,
    active: Vec<usize>,
    pairs: Vec<(usize, usize, Exp)>,
}

impl Builder {
    fn lm(&self, i: usize) -> &Exp {
        &self.polys[i][0].0
    }

    fn update(&mut self, h: usize) {
        let lh = self.lm(h).clone();
        let cands: Vec<(usize, Exp)> = self
            .active
            .iter()
            .map(|&g| (g, monomial::lcm(&lh, self.lm(g))))
            .collect();
        let mut keep = Vec::new();
        for (idx, (g1, l1)) in cands.iter().enumerate() {
            if monomial::coprime(&lh, self.lm(*g1)) {
                keep.push((*g1, l1.clone()));
                continue;
            }
            let dominated_later = cands
                .iter()
                .skip(idx + 1)
                .any(|(_, l2)| monomial::divides(l2, l1));
            let dominated_kept = keep.iter().any(|(_, l2)| monomial::divides(l2, l1));
            if !dominated_later && !dominated_kept {
                keep.push((*g1, l1.clone()));
            }
        }
        let fresh: Vec<(usize, usize, Exp)> = keep
            .into_iter()
            .filter(|(g, _)| !monomial::coprime(&lh, self.lm(*g)))
            .map(|(g, l)| (g, h, l))
            .collect();
        let polys = &self.polys;
        self.pairs.retain(|(g1, g2, l12)| {
            if !monomial::divides(&lh, l12) {
                return true;
            }
            let l1h = monomial::lcm(&polys[*g1][0].0, &lh);
            let lh2 = monomial::lcm(&lh, &polys[*g2][0].0);
            &l1h == l12 || &lh2 == l12
        });
        self.pairs.extend(fresh);
        let lhc = lh.clone();
        let polys = &self.polys;
        self.active
            .retain(|&g| !monomial::divides(&lhc, &polys[g][0].0));
        self.active.push(h);
    }

    fn add(&mut self, t: Terms) -> bool {
        let t = monic(t);
        let is_unit = monomial::degree(&t[0].0) == 0;
        self.polys.push(t);
        let h = self.polys.len() - 1;
        if is_unit {
            self.active = vec![h];
            self.pairs.clear();
            return true;
        }
        self.update(h);
        false
    }

    fn reduce(&self, f: Terms) -> Terms {
        let basis: Vec<&Terms> = self.active.iter().map(|&i| &self.polys[i]).collect();
        reduce_terms(self.order, f, &basis)
    }
}

impl GroebnerBasis {
    pub fn compute(ring: &RingRef, gens: &[Polynomial], order: MonomialOrder) -> Self {
        let mut b = Builder {
            order,
            polys: Vec::new(),
            active: Vec::new(),
            pairs: Vec::new(),
        };
        let mut inputs: Vec<Terms> = gens
            .iter()
            .filter(|g| !g.is_zero())
            .map(|g| to_terms(g, order))
            .collect();
        inputs.sort_by(|a, b| order.cmp(&a[0].0, &b[0].0));
        let mut unit = false;
        for t in inputs {
            let r = b.reduce(t);
            if !r.is_empty() && b.add(r) {
                unit = true;
                break;
            }
        }
        while !unit && !b.pairs.is_empty() {
            let best = (0..b.pairs.len())
                .min_by(|&i, &j| {
                    let li = &b.pairs[i].2;
                    let lj = &b.pairs[j].2;
                    monomial::degree(li)
                        .cmp(&monomial::degree(lj))
                        .then_with(|| order.cmp(li, lj))
                })
                .expect("nonempty");
            let (i, j, _) = b.pairs.swap_remove(best);
            let s = s_poly(order, &b.polys[i], &b.polys[j]);
            if s.is_empty() {
                continue;
            }
            let r = b.reduce(s);
            if !r.is_empty() && b.add(r) {
                unit = true;
            }
        }
        let mut basis: Vec<Terms> = b.active.iter().map(|&i| b.polys[i].clone()).collect();
        basis.sort_by(|x, y| order.cmp(&x[0].0, &y[0].0));
        // Interreduce tails.
        let mut reduced = Vec::with_capacity(basis.len());
        for i in 0..basis.len() {
            let others: Vec<&Terms> = basis
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, t)| t)
                .collect();
            let head = basis[i][0].clone();
            let tail: Terms = basis[i][1..].to_vec();
            let mut t = vec![head];
            t.extend(reduce_terms(order, tail, &others));
            reduced.push(t);
        }
        GroebnerBasis {
            ring: ring.clone(),
            order,
            polys: reduced,
        }
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.polys
            .iter()
            .any(|t| monomial::degree(&t[0].0) == 0)
    }

    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.polys
            .iter()
            .map(|t| Polynomial::from_terms(&self.ring, t.iter().cloned()))
            .collect()
    }

    pub fn leading_monomials(&self) -> Vec<Exp> {
        self.polys.iter().map(|t| t[0].0.clone()).collect()
    }

    /// Normal form of f.
    pub fn reduce(&self, f: &Polynomial) -> Polynomial {
        let basis: Vec<&Terms> = self.polys.iter().collect();
        let r = reduce_terms(self.order, to_terms(f, self.order), &basis);
        Polynomial::from_terms(&self.ring, r)
    }

    pub fn contains(&self, f: &Polynomial) -> bool {
        self.reduce(f).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;
    use crate::rational::rat;

    #[test]
    fn twisted_cubic() {
        let r = Ring::new(&["x", "y", "z"]).unwrap();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let z = Polynomial::var(&r, 2);
        let gens = vec![&y - &x.pow(2), &z - &x.pow(3)];
        let gb = GroebnerBasis::compute(&r, &gens, MonomialOrder::Grevlex);
        assert_eq!(gb.len(), 3);
        assert!(gb.contains(&(&(&x * &z) - &y.pow(2))));
        assert!(!gb.contains(&x));
        let lex = GroebnerBasis::compute(&r, &gens, MonomialOrder::Lex);
        assert!(lex.contains(&(&z.pow(2) - &y.pow(3))));
    }

    #[test]
    fn unit_detection() {
        let r = Ring::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&r, 0);
        let one = Polynomial::one(&r);
        let gens = vec![x.clone(), &x + &one];
        let gb = GroebnerBasis::compute(&r, &gens, MonomialOrder::Grevlex);
        assert!(gb.is_unit());
        assert_eq!(gb.len(), 1);
        assert_eq!(gb.reduce(&x.scale(&rat(7))), Polynomial::zero(&r));
    }

    #[test]
    fn reduced_basis_is_canonical() {
        let r = Ring::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let a = vec![x.pow(2), &x * &y, y.clone()];
        let b = vec![y.scale(&rat(3)), x.pow(2)];
        let ga = GroebnerBasis::compute(&r, &a, MonomialOrder::Grevlex).polynomials();
        let gb = GroebnerBasis::compute(&r, &b, MonomialOrder::Grevlex).polynomials();
        assert_eq!(ga, gb);
    }
}
