use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::gcd::{gcd, rational_roots, squarefree_part};
use num_integer::Integer;

use crate::ideal::Ideal;
use crate::monomial::Exp;
use crate::poly::Polynomial;
use crate::rational::Rational;

const SPLIT_BUDGET: usize = 400;

/// Heuristic irreducibility test; false means "not certified".
pub fn certified_irreducible(f: &Polynomial) -> bool {
    if f.is_zero() || f.is_constant() {
        return false;
    }
    if f.total_degree() == Some(1) {
        return true;
    }
    let vars = f.variables();
    for &v in &vars {
        if f.degree_in(v) == 1 {
            let co = f.coefficients_in(v);
            if gcd(&co[1], &co[0]).is_constant() {
                return true;
            }
        }
    }
    if f.num_terms() == 2 && f.monomial_content().iter().all(|&e| e == 0) {
        // Newton polytope is a segment; it is indecomposable when the segment is primitive.
        let exps: Vec<&Exp> = f.terms().map(|(e, _)| e).collect();
        let g = exps[0]
            .iter()
            .zip(exps[1].iter())
            .fold(0u32, |acc, (&a, &b)| acc.gcd(&a.abs_diff(b)));
        if g == 1 {
            return true;
        }
    }
    if vars.len() == 1 {
        let v = *vars.iter().next().expect("one variable");
        let d = f.degree_in(v);
        if (d == 2 || d == 3) && rational_roots(f, v).is_some_and(|r| r.is_empty()) {
            return true;
        }
    }
    false
}

/// Certifies primality by eliminating graph generators c*x_v + h and checking that what is
/// left is zero or a single certified irreducible polynomial.
pub fn prime_certificate(ideal: &Ideal) -> bool {
    if ideal.is_unit() {
        return false;
    }
    let ring = ideal.ring().clone();
    let mut gens: Vec<Polynomial> = ideal.reduced().generators().to_vec();
    let mut done: BTreeSet<usize> = BTreeSet::new();
    loop {
        let mut pick: Option<(usize, usize, Rational, Polynomial)> = None;
        'outer: for (k, g) in gens.iter().enumerate() {
            for v in g.variables() {
                if done.contains(&v) {
                    continue;
                }
                if let Some((c, h)) = g.linear_in(v) {
                    pick = Some((k, v, c, h));
                    break 'outer;
                }
            }
        }
        let Some((k, v, c, h)) = pick else { break };
        let value = h.scale(&(-(Rational::from_integer(1.into()) / c)));
        let images: Vec<Polynomial> = (0..ring.arity())
            .map(|i| if i == v { value.clone() } else { Polynomial::var(&ring, i) })
            .collect();
        let rest: Vec<Polynomial> = gens
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, g)| g.substitute(&images).expect("arity"))
            .collect();
        done.insert(v);
        let next = Ideal::new(&ring, rest);
        if next.is_zero() {
            return true;
        }
        if next.is_unit() {
            return false;
        }
        gens = next.reduced().generators().to_vec();
    }
    match gens.len() {
        0 => true,
        1 => certified_irreducible(&gens[0]),
        _ => false,
    }
}

enum Split {
    Refine(Polynomial),
    Factors(Vec<Polynomial>),
}

/// Splits c0*u0^g + c1*u1^g (coprime monomials u0, u1, g > 1) by the rational roots of
/// c0*t^g + c1.
fn binomial_factors(p: &Polynomial) -> Option<Vec<Polynomial>> {
    if p.num_terms() != 2 || p.monomial_content().iter().any(|&e| e > 0) {
        return None;
    }
    let ring = p.ring().clone();
    let terms: Vec<(Exp, Rational)> = p.terms().map(|(e, c)| (e.clone(), c.clone())).collect();
    let g = terms[0].0.iter().chain(terms[1].0.iter()).fold(0u32, |acc, &a| acc.gcd(&a));
    if g <= 1 {
        return None;
    }
    let root_of = |e: &Exp| e.iter().map(|&a| a / g).collect::<Exp>();
    let (u0, u1) = (root_of(&terms[0].0), root_of(&terms[1].0));
    let mut t = vec![0u32; ring.arity()];
    t[0] = g;
    let uni = Polynomial::from_terms(&ring, [(t, terms[0].1.clone()), (vec![0; ring.arity()], terms[1].1.clone())]);
    let roots = rational_roots(&uni, 0)?;
    if roots.is_empty() {
        return None;
    }
    let one = Rational::from_integer(1.into());
    let mut rest = p.clone();
    let mut fs = Vec::new();
    for r in roots {
        let lin = Polynomial::from_terms(&ring, [(u0.clone(), one.clone()), (u1.clone(), -r)]);
        rest = rest.div_exact(&lin)?;
        fs.push(lin.primitive());
    }
    if !rest.is_constant() {
        fs.push(rest.primitive());
    }
    Some(fs)
}

fn factor_candidates(p: &Polynomial) -> Option<Split> {
    let prim = p.primitive();
    let sq = squarefree_part(p);
    if sq != prim {
        return Some(Split::Refine(sq));
    }
    let ring = p.ring().clone();
    let content = p.monomial_content();
    if content.iter().any(|&e| e > 0) && p.num_terms() > 1 {
        let mut fs: Vec<Polynomial> = content
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| Polynomial::var(&ring, i))
            .collect();
        fs.push(p.div_monomial(&content).primitive());
        return Some(Split::Factors(fs));
    }
    if p.num_terms() == 1 {
        let fs: Vec<Polynomial> = p.variables().into_iter().map(|i| Polynomial::var(&ring, i)).collect();
        if fs.len() >= 2 {
            return Some(Split::Factors(fs));
        }
        return None;
    }
    for v in p.variables() {
        if p.degree_in(v) == 1 {
            let co = p.coefficients_in(v);
            let g = gcd(&co[1], &co[0]);
            if !g.is_constant() {
                let rest = p.div_exact(&g).expect("gcd divides").primitive();
                return Some(Split::Factors(vec![g, rest]));
            }
        }
    }
    if let Some(fs) = binomial_factors(p) {
        return Some(Split::Factors(fs));
    }
    let vars = p.variables();
    if vars.len() == 1 {
        let v = *vars.iter().next().expect("one variable");
        if let Some(roots) = rational_roots(p, v) {
            if !roots.is_empty() && p.degree_in(v) > 1 {
                let mut fs = Vec::new();
                let mut rest = p.clone();
                for r in roots {
                    let lin = &Polynomial::var(&ring, v) - &Polynomial::constant(&ring, r);
                    rest = rest.div_exact(&lin).expect("root gives a factor");
                    fs.push(lin.primitive());
                }
                if !rest.is_constant() {
                    fs.push(rest.primitive());
                }
                return Some(Split::Factors(fs));
            }
        }
    }
    None
}

fn find_split(ideal: &Ideal) -> Option<Split> {
    let mut cands: Vec<Polynomial> = ideal.reduced().generators().to_vec();
    for g in ideal.generators() {
        if !cands.contains(g) {
            cands.push(g.clone());
        }
    }
    cands.sort_by_key(|p| (p.total_degree(), p.num_terms()));
    for p in &cands {
        if let Some(s) = factor_candidates(p) {
            let useful = match &s {
                Split::Refine(q) => !ideal.contains(q),
                Split::Factors(fs) => fs.iter().all(|q| !ideal.contains(q)),
            };
            if useful {
                return Some(s);
            }
        }
    }
    for (i, p) in cands.iter().enumerate() {
        for q in cands.iter().skip(i + 1) {
            let g = gcd(p, q);
            if !g.is_constant() && g != p.primitive() && !ideal.contains(&g) {
                let rest = p.div_exact(&g).expect("gcd divides").primitive();
                if !ideal.contains(&rest) {
                    return Some(Split::Factors(vec![g, rest]));
                }
            }
        }
    }
    None
}

/// Minimal primes by recursive factorizing splits. Each returned ideal carries a primality
/// certificate; failure to split an uncertified branch is an error.
pub fn minimal_primes(ideal: &Ideal) -> Result<Vec<Ideal>> {
    if ideal.is_unit() {
        return Err(Error::UnitIdeal);
    }
    let mut work = vec![ideal.reduced()];
    let mut primes: Vec<Ideal> = Vec::new();
    let mut budget = SPLIT_BUDGET;
    while let Some(j) = work.pop() {
        if budget == 0 {
            return Err(Error::DecompositionIncomplete(ideal.to_string()));
        }
        budget -= 1;
        if j.is_unit() {
            continue;
        }
        if prime_certificate(&j) {
            primes.push(j);
            continue;
        }
        match find_split(&j) {
            Some(Split::Refine(q)) => work.push(j.with(&[q]).reduced()),
            Some(Split::Factors(fs)) => {
                let mut branches = Vec::new();
                for (k, q) in fs.iter().enumerate() {
                    let mut b = j.with(std::slice::from_ref(q));
                    for prev in &fs[..k] {
                        b = b.saturate_by(prev).0;
                    }
                    branches.push(b.reduced());
                }
                work.extend(branches.into_iter().rev());
            }
            None => return Err(Error::DecompositionIncomplete(j.to_string())),
        }
    }
    let mut minimal: Vec<Ideal> = Vec::new();
    for (i, p) in primes.iter().enumerate() {
        let dominated = primes.iter().enumerate().any(|(k, q)| {
            k != i && p.contains_ideal(q) && (!q.contains_ideal(p) || k < i)
        });
        if !dominated {
            minimal.push(p.reduced());
        }
    }
    minimal.sort_by_key(|p| p.to_string());
    Ok(minimal)
}

/// Intersection of a list of ideals.
pub fn intersect_all(ideals: &[Ideal]) -> Option<Ideal> {
    let mut it = ideals.iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, i| acc.intersect(i)))
}

/// Dimensions of the minimal primes, or the single dimension when the ideal is a
/// complete intersection.
pub fn component_dimensions(ideal: &Ideal) -> Result<Vec<i64>> {
    let d = ideal.ring().arity() as i64;
    let dim = ideal.dimension();
    let codim = (d - dim) as usize;
    let ngens = ideal.generators().len().min(ideal.reduced().generators().len());
    if ngens == codim {
        return Ok(vec![dim]);
    }
    let primes = minimal_primes(ideal)?;
    let mut dims: Vec<i64> = primes.iter().map(|p| p.dimension()).collect();
    dims.sort();
    dims.dedup();
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;

    #[test]
    fn splits_products_of_coordinates() {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let ps = minimal_primes(&Ideal::principal(&x1 * &x2)).unwrap();
        assert_eq!(ps.len(), 2);
        assert!(ps[0].equals(&Ideal::principal(x1.clone())));
        assert!(ps[1].equals(&Ideal::principal(x2.clone())));
        let ps = minimal_primes(&Ideal::new(&r, vec![x1.clone(), &x2 * &x3])).unwrap();
        assert_eq!(ps.len(), 2);
        assert!(ps[0].equals(&Ideal::new(&r, vec![x1.clone(), x2.clone()])));
        assert!(ps[1].equals(&Ideal::new(&r, vec![x1.clone(), x3.clone()])));
    }

    #[test]
    fn certifies_primes() {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        assert!(prime_certificate(&Ideal::new(&r, vec![x1.clone(), x2.clone()])));
        let strict = &(&x3 + &x2) + &(&x2 * &x3.pow(3));
        assert!(prime_certificate(&Ideal::new(&r, vec![x1.clone(), strict])));
        assert!(!prime_certificate(&Ideal::principal(&x1 * &x2)));
        let ps = minimal_primes(&Ideal::new(&r, vec![x1.clone(), x2.clone()])).unwrap();
        assert_eq!(ps.len(), 1);
    }

    #[test]
    fn radical_refinement_and_disjoint_components() {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let one = Polynomial::one(&r);
        let a = Ideal::new(&r, vec![x1.clone(), x2.clone()]);
        let b = Ideal::new(&r, vec![&x1 - &one, x3.clone()]);
        let ps = minimal_primes(&a.intersect(&b)).unwrap();
        assert_eq!(ps.len(), 2);
        let ps = minimal_primes(&Ideal::new(&r, vec![x1.pow(2), x2.pow(3)])).unwrap();
        assert_eq!(ps.len(), 1);
        assert!(ps[0].equals(&a));
    }

    #[test]
    fn nodal_cubic_is_not_certified() {
        let r = Ring::new(&["x2", "x3"]).unwrap();
        let x2 = Polynomial::var(&r, 0);
        let x3 = Polynomial::var(&r, 1);
        let f = &(&(&x2 * &x3) + &x2.pow(3)) + &x3.pow(3);
        assert!(matches!(
            minimal_primes(&Ideal::principal(f)),
            Err(Error::DecompositionIncomplete(_))
        ));
    }

    #[test]
    fn primitive_binomials_are_irreducible() {
        let r = Ring::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let one = Polynomial::one(&r);
        assert!(certified_irreducible(&(&(&x.pow(5) * &y.pow(3)) - &one)));
        assert!(certified_irreducible(&(&y.pow(3) - &x.pow(4))));
        assert!(!certified_irreducible(&(&y.pow(2) - &x.pow(4))));
        assert!(!certified_irreducible(&(&(&x * &y.pow(2)) - &x)));
    }


    #[test]
    fn binomials_split_by_roots() {
        let r = Ring::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let one = Polynomial::one(&r);
        let f = &(&x.pow(6) * &y.pow(2)) - &one;
        let primes = minimal_primes(&Ideal::principal(f.clone())).unwrap();
        assert_eq!(primes.len(), 2);
        assert!(intersect_all(&primes).unwrap().equals(&Ideal::principal(f)));
    }

}
