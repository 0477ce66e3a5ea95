use rand::seq::SliceRandom;
use rand::Rng;

use crate::gcd::rational_roots;
use crate::ideal::Ideal;
use crate::poly::Polynomial;
use crate::rational::Rational;

/// Tries to find one rational point of V(ideal): variables are fixed from the last to the
/// first, each either free (random integer in [-range, range]) or a rational root of the
/// univariate elimination ideal.
pub fn rational_point<R: Rng>(ideal: &Ideal, rng: &mut R, range: i64) -> Option<Vec<Rational>> {
    let ring = ideal.ring().clone();
    let d = ring.arity();
    let mut fixed: Vec<Option<Rational>> = vec![None; d];
    for k in (0..d).rev() {
        let mut gens = ideal.generators().to_vec();
        for (j, v) in fixed.iter().enumerate() {
            if let Some(v) = v {
                gens.push(&Polynomial::var(&ring, j) - &Polynomial::constant(&ring, v.clone()));
            }
        }
        let cur = Ideal::new(&ring, gens);
        if cur.is_unit() {
            return None;
        }
        let others: Vec<usize> = (0..d).filter(|&j| j != k).collect();
        let elim = cur.eliminate(&others).reduced();
        let value = match elim.generators().first() {
            None => Rational::from_integer(rng.gen_range(-range..=range).into()),
            Some(g) => {
                let roots = rational_roots(g, k)?;
                roots.choose(rng)?.clone()
            }
        };
        fixed[k] = Some(value);
    }
    let point: Vec<Rational> = fixed.into_iter().map(|v| v.expect("all fixed")).collect();
    ideal.vanishes_at(&point).then_some(point)
}

/// Up to `count` distinct rational points of V(ideal) within `attempts` tries.
pub fn rational_points<R: Rng>(
    ideal: &Ideal,
    rng: &mut R,
    count: usize,
    attempts: usize,
    range: i64,
) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for _ in 0..attempts {
        if out.len() >= count {
            break;
        }
        if let Some(p) = rational_point(ideal, rng, range) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}
