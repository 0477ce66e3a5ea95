use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ideal::Ideal;
use crate::poly::Polynomial;
use crate::rational::{small_divisors, Rational};

/// Greatest common divisor in integer primitive form with positive grevlex leading coefficient.
pub fn gcd(f: &Polynomial, g: &Polynomial) -> Polynomial {
    let ring = f.ring().clone();
    if f.is_zero() {
        return g.primitive();
    }
    if g.is_zero() {
        return f.primitive();
    }
    if f.is_constant() || g.is_constant() {
        return Polynomial::one(&ring);
    }
    let cf = f.monomial_content();
    let cg = g.monomial_content();
    let common: Vec<u32> = cf.iter().zip(&cg).map(|(a, b)| *a.min(b)).collect();
    let fr = f.div_monomial(&cf);
    let gr = g.div_monomial(&cg);
    let mono = Polynomial::monomial(&ring, common, Rational::from_integer(1.into()));
    let rest = if fr.is_constant() || gr.is_constant() {
        Polynomial::one(&ring)
    } else if fr.div_exact(&gr).is_some() {
        gr.clone()
    } else if gr.div_exact(&fr).is_some() {
        fr.clone()
    } else {
        let lcm = Ideal::principal(fr.clone())
            .intersect(&Ideal::principal(gr.clone()))
            .reduced();
        let l = lcm.generators()[0].clone();
        (&fr * &gr).div_exact(&l).expect("lcm divides the product")
    };
    (&mono * &rest).primitive()
}

pub fn gcd_all(fs: &[Polynomial]) -> Result<Polynomial> {
    let nonzero: Vec<&Polynomial> = fs.iter().filter(|f| !f.is_zero()).collect();
    let first = nonzero.first().ok_or(Error::AllZeroInput)?;
    let mut g = first.primitive();
    for f in nonzero.iter().skip(1) {
        if g.is_constant() {
            break;
        }
        g = gcd(&g, f);
    }
    Ok(g)
}

/// Product of the distinct irreducible factors of f, up to a unit.
pub fn squarefree_part(f: &Polynomial) -> Polynomial {
    if f.is_zero() || f.is_constant() {
        return f.primitive();
    }
    let mut parts = vec![f.clone()];
    for i in 0..f.arity() {
        let d = f.derivative(i);
        if !d.is_zero() {
            parts.push(d);
        }
    }
    let g = gcd_all(&parts).expect("f is nonzero");
    f.div_exact(&g).expect("gcd divides f").primitive()
}

/// Squarefree part of the gcd of the inputs.
pub fn squarefree_gcd(fs: &[Polynomial]) -> Result<Polynomial> {
    Ok(squarefree_part(&gcd_all(fs)?))
}

/// Rational roots of a polynomial involving only variable `var`.
/// Returns None if the coefficients are too large to enumerate candidates.
pub fn rational_roots(f: &Polynomial, var: usize) -> Option<Vec<Rational>> {
    if f.is_zero() || f.variables().iter().any(|&i| i != var) {
        return None;
    }
    let p = f.primitive();
    let coeffs: Vec<Rational> = p
        .coefficients_in(var)
        .iter()
        .map(|c| c.constant_term())
        .collect();
    let low = coeffs.iter().position(|c| !c.is_zero())?;
    let mut roots = Vec::new();
    if low > 0 {
        roots.push(Rational::zero());
    }
    let a0: BigInt = coeffs[low].to_integer();
    let an: BigInt = coeffs[coeffs.len() - 1].to_integer();
    if coeffs.len() - 1 == low {
        return Some(roots);
    }
    let ps = small_divisors(&a0)?;
    let qs = small_divisors(&an)?;
    let mut cands = Vec::new();
    for &pp in &ps {
        for &qq in &qs {
            for s in [1i64, -1] {
                cands.push(Rational::new(BigInt::from(pp) * s, BigInt::from(qq)));
            }
        }
    }
    cands.sort();
    cands.dedup();
    let zero_point = vec![Rational::zero(); f.arity()];
    for c in cands {
        let mut pt = zero_point.clone();
        pt[var] = c.clone();
        if p.evaluate(&pt).is_zero() {
            roots.push(c);
        }
    }
    roots.sort();
    Some(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Ring;
    use crate::rational::{rat, ratio};

    #[test]
    fn gcd_of_products() {
        let r = Ring::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let a = &x + &y;
        let b = &x - &y;
        let f = &(&a * &a) * &b;
        let g = &(&a * &b) * &x;
        assert_eq!(gcd(&f, &g), (&a * &b).primitive());
        assert_eq!(gcd(&x.pow(2), &(&x * &y)), x.clone());
        assert_eq!(gcd(&(&x + &Polynomial::one(&r)), &y), Polynomial::one(&r));
    }

    #[test]
    fn gcd_normal_form() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let f = &x1.pow(2) * &x2;
        let g = &x1 * &x2.pow(3);
        assert_eq!(gcd(&f, &g).to_string(), "x1*x2");
        assert_eq!(squarefree_part(&(&x1.pow(2) * &x2)).to_string(), "x1*x2");
        assert_eq!(gcd_all(&[Polynomial::zero(&r)]), Err(Error::AllZeroInput));
        assert_eq!(
            squarefree_gcd(&[x1.pow(3).scale(&ratio(-1, 2))]).unwrap().to_string(),
            "x1"
        );
    }

    #[test]
    fn univariate_roots() {
        let r = Ring::new(&["t"]).unwrap();
        let t = Polynomial::var(&r, 0);
        let f = &(&t.scale(&rat(2)) - &Polynomial::one(&r)) * &(&t + &Polynomial::constant(&r, rat(3)));
        assert_eq!(rational_roots(&f, 0), Some(vec![rat(-3), ratio(1, 2)]));
        let g = &t.pow(2) - &Polynomial::constant(&r, rat(2));
        assert_eq!(rational_roots(&g, 0), Some(vec![]));
    }
}
