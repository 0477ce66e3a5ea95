use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Polynomial, RingRef};
use crate::rational::Rational;

/// Elementary coordinate change. `Linear(m)` sends x_i to sum_j m[i][j] x_j.
/// `Triangular` sends x_target to x_target + shift, with shift free of x_target.
#[derive(Debug, Clone, PartialEq)]
pub enum Move {
    Linear(Vec<Vec<Rational>>),
    Triangular { target: usize, shift: Polynomial },
}

/// Composite of elementary moves applied left to right by substitution.
#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    ring: RingRef,
    moves: Vec<Move>,
}

pub(crate) fn invert_matrix(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = Rational::one() / &a[col][col];
        for x in a[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(pivot_row) {
                    *x -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

impl Move {
    fn images(&self, ring: &RingRef) -> Vec<Polynomial> {
        let d = ring.arity();
        match self {
            Move::Linear(m) => (0..d)
                .map(|i| {
                    let mut p = Polynomial::zero(ring);
                    for (j, c) in m[i].iter().enumerate() {
                        if !c.is_zero() {
                            p = &p + &Polynomial::var(ring, j).scale(c);
                        }
                    }
                    p
                })
                .collect(),
            Move::Triangular { target, shift } => (0..d)
                .map(|i| {
                    let x = Polynomial::var(ring, i);
                    if i == *target {
                        &x + shift
                    } else {
                        x
                    }
                })
                .collect(),
        }
    }

    fn inverse(&self) -> Move {
        match self {
            Move::Linear(m) => Move::Linear(invert_matrix(m).expect("validated invertible")),
            Move::Triangular { target, shift } => Move::Triangular {
                target: *target,
                shift: -shift,
            },
        }
    }

    fn inverse_point(&self, x: &[Rational]) -> Vec<Rational> {
        match self {
            Move::Linear(m) => {
                let inv = invert_matrix(m).expect("validated invertible");
                inv.iter()
                    .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
                    .collect()
            }
            Move::Triangular { target, shift } => {
                let mut y = x.to_vec();
                y[*target] = &x[*target] - shift.evaluate(x);
                y
            }
        }
    }

    fn validate(&self, ring: &RingRef, frozen: &BTreeSet<usize>) -> Result<()> {
        let d = ring.arity();
        match self {
            Move::Linear(m) => {
                if m.len() != d || m.iter().any(|r| r.len() != d) {
                    return Err(Error::ArityMismatch {
                        expected: d,
                        found: m.len(),
                    });
                }
                for &f in frozen {
                    for (j, c) in m[f].iter().enumerate() {
                        let want = if j == f { Rational::one() } else { Rational::zero() };
                        if *c != want {
                            return Err(Error::FrozenViolation(f));
                        }
                    }
                }
                if invert_matrix(m).is_none() {
                    return Err(Error::SingularMove);
                }
            }
            Move::Triangular { target, shift } => {
                if *target >= d {
                    return Err(Error::UnknownCoordinate(*target));
                }
                if shift.arity() != d {
                    return Err(Error::ArityMismatch {
                        expected: d,
                        found: shift.arity(),
                    });
                }
                if frozen.contains(target) {
                    return Err(Error::FrozenViolation(*target));
                }
                if !shift.is_free_of(*target) {
                    return Err(Error::PreconditionViolated(
                        "triangular shift involves its own target".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl Automorphism {
    pub fn identity(ring: &RingRef) -> Self {
        Automorphism {
            ring: ring.clone(),
            moves: Vec::new(),
        }
    }

    /// Builds a composite, rejecting moves that touch a frozen coordinate.
    pub fn new(ring: &RingRef, moves: Vec<Move>, frozen: &BTreeSet<usize>) -> Result<Self> {
        for m in &moves {
            m.validate(ring, frozen)?;
        }
        Ok(Automorphism {
            ring: ring.clone(),
            moves,
        })
    }

    pub fn triangular(
        ring: &RingRef,
        target: usize,
        shift: Polynomial,
        frozen: &BTreeSet<usize>,
    ) -> Result<Self> {
        Self::new(ring, vec![Move::Triangular { target, shift }], frozen)
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn moves(&self) -> &[Move] {
        &self.moves
    }

    pub fn is_identity(&self) -> bool {
        self.moves.is_empty()
    }

    /// Composite that applies `self` first and then `other`.
    pub fn then(&self, other: &Automorphism) -> Automorphism {
        let mut moves = self.moves.clone();
        moves.extend(other.moves.iter().cloned());
        Automorphism {
            ring: self.ring.clone(),
            moves,
        }
    }

    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut g = f.clone();
        for m in &self.moves {
            g = g.substitute(&m.images(&self.ring)).expect("arity checked");
        }
        g
    }

    pub fn apply_all(&self, fs: &[Polynomial]) -> Vec<Polynomial> {
        fs.iter().map(|f| self.apply(f)).collect()
    }

    /// Images of the coordinates: apply(f) = f(images).
    pub fn images(&self) -> Vec<Polynomial> {
        (0..self.ring.arity())
            .map(|i| self.apply(&Polynomial::var(&self.ring, i)))
            .collect()
    }

    pub fn inverse(&self) -> Automorphism {
        Automorphism {
            ring: self.ring.clone(),
            moves: self.moves.iter().rev().map(Move::inverse).collect(),
        }
    }

    /// Coordinates in the new system of a point given in the old system.
    pub fn point_to_new(&self, x: &[Rational]) -> Vec<Rational> {
        let mut y = x.to_vec();
        for m in &self.moves {
            y = m.inverse_point(&y);
        }
        y
    }

    /// Coordinates in the old system of a point given in the new system.
    pub fn point_to_old(&self, y: &[Rational]) -> Vec<Rational> {
        self.images().iter().map(|p| p.evaluate(y)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;
    use crate::rational::rat;

    #[test]
    fn triangular_round_trip() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let phi = Automorphism::triangular(&r, 0, -&x2.pow(2), &BTreeSet::new()).unwrap();
        let f = &x1 + &x2.pow(2);
        assert_eq!(phi.apply(&f), x1.clone());
        assert_eq!(phi.inverse().apply(&phi.apply(&f)), f);
        let p = vec![rat(3), rat(2)];
        let q = phi.point_to_new(&p);
        assert_eq!(q, vec![rat(7), rat(2)]);
        assert_eq!(phi.point_to_old(&q), p);
    }

    #[test]
    fn frozen_coordinates_are_protected() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let frozen: BTreeSet<usize> = [0].into_iter().collect();
        let x2 = Polynomial::var(&r, 1);
        assert_eq!(
            Automorphism::triangular(&r, 0, x2.clone(), &frozen),
            Err(Error::FrozenViolation(0))
        );
        let swap = vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]];
        assert_eq!(
            Automorphism::new(&r, vec![Move::Linear(swap)], &frozen),
            Err(Error::FrozenViolation(0))
        );
        let singular = vec![vec![rat(1), rat(1)], vec![rat(1), rat(1)]];
        assert_eq!(
            Automorphism::new(&r, vec![Move::Linear(singular)], &BTreeSet::new()),
            Err(Error::SingularMove)
        );
    }

    #[test]
    fn linear_inverse() {
        let r = Ring::new(&["x", "y"]).unwrap();
        let m = vec![vec![rat(1), rat(2)], vec![rat(0), rat(1)]];
        let phi = Automorphism::new(&r, vec![Move::Linear(m)], &BTreeSet::new()).unwrap();
        let f = &Polynomial::var(&r, 0).pow(2) + &Polynomial::var(&r, 1);
        assert_eq!(phi.inverse().apply(&phi.apply(&f)), f);
        let p = vec![rat(5), rat(-1)];
        assert_eq!(phi.point_to_old(&phi.point_to_new(&p)), p);
    }
}
