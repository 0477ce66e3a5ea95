use std::cmp::Ordering;

/// Exponent vector of a monomial.
pub type Exp = Vec<u32>;

pub fn degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

pub fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn mul(a: &[u32], b: &[u32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// b / a, assuming a divides b.
pub fn quotient(b: &[u32], a: &[u32]) -> Exp {
    b.iter().zip(a).map(|(x, y)| x - y).collect()
}

pub fn lcm(a: &[u32], b: &[u32]) -> Exp {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

pub fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

/// Monomial orders. `Block { split }` orders the first `split` variables by grevlex,
/// breaking ties by grevlex on the remaining variables; it eliminates the first block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    Grevlex,
    Lex,
    Block { split: usize },
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    match degree(a).cmp(&degree(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.iter().zip(b).rev() {
        if x != y {
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self {
            MonomialOrder::Grevlex => grevlex(a, b),
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::Block { split } => {
                let s = (*split).min(a.len());
                grevlex(&a[..s], &b[..s]).then_with(|| grevlex(&a[s..], &b[s..]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grevlex_examples() {
        let o = MonomialOrder::Grevlex;
        // x^2 > xy > y^2 > xz > yz > z^2 in degree two
        let seq = [
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![0, 2, 0],
            vec![1, 0, 1],
            vec![0, 1, 1],
            vec![0, 0, 2],
        ];
        for w in seq.windows(2) {
            assert_eq!(o.cmp(&w[0], &w[1]), Ordering::Greater);
        }
        assert_eq!(o.cmp(&[0, 0, 1], &[1, 0, 0]), Ordering::Less);
    }

    #[test]
    fn lex_and_block() {
        assert_eq!(MonomialOrder::Lex.cmp(&[1, 0], &[0, 5]), Ordering::Greater);
        let b = MonomialOrder::Block { split: 1 };
        assert_eq!(b.cmp(&[1, 0, 0], &[0, 9, 9]), Ordering::Greater);
        assert_eq!(b.cmp(&[0, 1, 0], &[0, 0, 1]), Ordering::Greater);
    }

    #[test]
    fn arithmetic() {
        assert!(divides(&[1, 0], &[1, 2]));
        assert!(!divides(&[2, 0], &[1, 2]));
        assert_eq!(lcm(&[1, 3], &[2, 1]), vec![2, 3]);
        assert_eq!(quotient(&[2, 3], &[1, 1]), vec![1, 2]);
        assert!(coprime(&[1, 0], &[0, 2]));
    }
}
