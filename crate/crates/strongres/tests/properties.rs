use std::collections::BTreeSet;

use proptest::prelude::*;
use strongres::invariants::{FValue, GammaVal, TValue};
use strongres::primes::{intersect_all, minimal_primes};
use strongres::rational::{format_rational, parse_rational, ratio};
use strongres::{Automorphism, Ideal, Move, MonomialOrder, Polynomial, Rational, Ring, RingRef};

fn ring3() -> RingRef {
    Ring::new(&["x", "y", "z"]).unwrap()
}

fn exps(max_deg: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max_deg, 3)
}

fn poly_from(ring: &RingRef, terms: &[(Vec<u32>, i64)]) -> Polynomial {
    Polynomial::from_terms(ring, terms.iter().map(|(e, c)| (e.clone(), ratio(*c, 1))))
}

fn small_poly() -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
    prop::collection::vec((exps(2), -3i64..=3), 1..4)
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-3i64..=3, 1i64..=2).prop_map(|(n, d)| ratio(n, d)), 3)
}

/// Expands g(x - p) for g given by terms of degree at least `low`; the order at p is known.
fn shifted(ring: &RingRef, terms: &[(Vec<u32>, i64)], p: &[Rational]) -> Polynomial {
    let images: Vec<Polynomial> = (0..3)
        .map(|i| &Polynomial::var(ring, i) - &Polynomial::constant(ring, p[i].clone()))
        .collect();
    poly_from(ring, terms).substitute(&images).unwrap()
}

/// Order at a point by the Taylor definition: translate, then take the least degree.
fn taylor_order(f: &Polynomial, p: &[Rational]) -> Option<u32> {
    let ring = f.ring().clone();
    let images: Vec<Polynomial> = (0..3)
        .map(|i| &Polynomial::var(&ring, i) + &Polynomial::constant(&ring, p[i].clone()))
        .collect();
    f.substitute(&images).unwrap().low_degree()
}

fn point_ideal(ring: &RingRef, p: &[Rational]) -> Ideal {
    Ideal::new(
        ring,
        (0..3)
            .map(|i| &Polynomial::var(ring, i) - &Polynomial::constant(ring, p[i].clone()))
            .collect(),
    )
}

/// Dimension of a monomial ideal from the coordinate subspaces it contains: the largest S
/// such that the 0/1 indicator point of S lies on V(I).
fn indicator_dimension(ideal: &Ideal, d: usize) -> i64 {
    let mut best = -1i64;
    for mask in 0u32..(1 << d) {
        let p: Vec<Rational> = (0..d).map(|i| ratio(((mask >> i) & 1) as i64, 1)).collect();
        if ideal.vanishes_at(&p) {
            best = best.max(mask.count_ones() as i64);
        }
    }
    best
}

fn tvalue() -> impl Strategy<Value = TValue> {
    prop_oneof![
        (0u32..4, 0i64..6, 1i64..4, prop::collection::vec(0u32..4, 0..3)).prop_map(|(p, n, d, ids)| {
            TValue::Gamma(GammaVal {
                p,
                ratio: ratio(n, d),
                ids,
            })
        }),
        (0i64..6, 1i64..4, 0u32..3).prop_map(|(n, d, k)| TValue::pair(ratio(n, d), k)),
        Just(TValue::Infinity),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn delta_order_matches_taylor_order(
        g in prop::collection::vec((exps(3), 1i64..=3), 1..4),
        low in 0u32..4,
        p in point(),
    ) {
        let r = ring3();
        let g: Vec<(Vec<u32>, i64)> = g.into_iter().filter(|(e, _)| e.iter().sum::<u32>() >= low).collect();
        prop_assume!(!g.is_empty());
        let f = shifted(&r, &g, &p);
        prop_assume!(!f.is_zero());
        let taylor = taylor_order(&f, &p);
        prop_assert_eq!(f.order_at(&p), taylor);
        prop_assert_eq!(Ideal::principal(f.clone()).order_along(&point_ideal(&r, &p)), taylor);
        prop_assert!(taylor.unwrap() >= low);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn monomial_dimension_matches_indicator_points(
        gens in prop::collection::vec(exps(3), 1..5),
    ) {
        let r = ring3();
        let polys: Vec<Polynomial> = gens.iter().map(|e| Polynomial::monomial(&r, e.clone(), ratio(1, 1))).collect();
        let i = Ideal::new(&r, polys);
        prop_assert_eq!(i.dimension(), indicator_dimension(&i, 3));
    }

    #[test]
    fn minimal_primes_recover_the_radical(
        pts in prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 1..3),
        lines in prop::collection::vec((0usize..3, -2i64..=2), 0..2),
        power in 1u32..3,
    ) {
        let r = ring3();
        let x = |i: usize| Polynomial::var(&r, i);
        let c = |n: i64| Polynomial::constant(&r, ratio(n, 1));
        let mut parts: Vec<Ideal> = pts
            .iter()
            .map(|q| Ideal::new(&r, vec![&x(0) - &c(q[0]), &(&x(1) - &c(q[1])) * &x(2)]))
            .collect();
        for (v, a) in &lines {
            parts.push(Ideal::new(&r, vec![&x(*v) - &c(*a), x((*v + 1) % 3)]));
        }
        let input = intersect_all(&parts).unwrap().power(power);
        if let Ok(primes) = minimal_primes(&input) {
            prop_assert!(!primes.is_empty());
            for p in &primes {
                prop_assert!(p.contains_ideal(&input));
            }
            prop_assert!(intersect_all(&primes).unwrap().same_radical(&input));
        }
    }

    #[test]
    fn reduction_is_idempotent_and_lands_in_the_class(
        gens in prop::collection::vec(small_poly(), 1..3),
        f in small_poly(),
    ) {
        let r = ring3();
        let i = Ideal::new(&r, gens.iter().map(|g| poly_from(&r, g)).collect());
        let f = poly_from(&r, &f);
        let gb = i.groebner();
        let once = gb.reduce(&f);
        prop_assert_eq!(gb.reduce(&once), once.clone());
        prop_assert!(i.contains(&(&f - &once)));
        for m in gb.leading_monomials() {
            for (e, _) in once.terms() {
                prop_assert!(!strongres::monomial::divides(&m, e));
            }
        }
    }

    #[test]
    fn basis_ignores_generator_order(
        gens in prop::collection::vec(small_poly(), 2..4),
    ) {
        let r = ring3();
        let polys: Vec<Polynomial> = gens.iter().map(|g| poly_from(&r, g)).collect();
        let mut rev = polys.clone();
        rev.reverse();
        let a = Ideal::new(&r, polys).groebner().polynomials();
        let b = Ideal::new(&r, rev).groebner().polynomials();
        prop_assert_eq!(a.clone(), b);
        for p in &a {
            let (_, c) = p.leading_term(MonomialOrder::Grevlex).unwrap();
            prop_assert_eq!(c.clone(), ratio(1, 1));
        }
    }

    #[test]
    fn colon_chain_grows_to_the_saturation(
        gens in prop::collection::vec(small_poly(), 1..3),
        g in small_poly(),
    ) {
        let r = ring3();
        let i = Ideal::new(&r, gens.iter().map(|g| poly_from(&r, g)).collect());
        let g = poly_from(&r, &g);
        prop_assume!(!g.is_zero());
        let (sat, k) = i.saturate_by(&g);
        let mut cur = i.clone();
        let mut prev = i.clone();
        for _ in 0..k {
            let next = cur.quotient_by(&g);
            prop_assert!(next.contains_ideal(&prev));
            prev = next.clone();
            cur = next;
        }
        prop_assert!(cur.equals(&sat));
        prop_assert!(sat.quotient_by(&g).equals(&sat));
        prop_assert!(sat.contains_ideal(&i));
    }

    #[test]
    fn automorphism_round_trip(
        f in small_poly(),
        shift in small_poly(),
        a in -2i64..=2,
    ) {
        let r = ring3();
        let f = poly_from(&r, &f);
        let shift = poly_from(&r, &shift.into_iter().map(|(mut e, c)| { e[0] = 0; (e, c) }).collect::<Vec<_>>());
        let m = vec![
            vec![ratio(1, 1), ratio(a, 1), ratio(0, 1)],
            vec![ratio(0, 1), ratio(1, 1), ratio(0, 1)],
            vec![ratio(0, 1), ratio(a, 1), ratio(1, 1)],
        ];
        let phi = Automorphism::new(
            &r,
            vec![Move::Triangular { target: 0, shift }, Move::Linear(m)],
            &BTreeSet::new(),
        )
        .unwrap();
        prop_assert_eq!(phi.inverse().apply(&phi.apply(&f)), f.clone());
        prop_assert_eq!(phi.apply(&phi.inverse().apply(&f)), f);
    }

    #[test]
    fn polynomials_store_no_zero_coefficients(f in small_poly(), g in small_poly()) {
        let r = ring3();
        let f = poly_from(&r, &f);
        let g = poly_from(&r, &g);
        for h in [&f + &g, &f - &f, &f * &g, f.derivative(1)] {
            for (e, c) in h.terms() {
                prop_assert_eq!(e.len(), 3);
                prop_assert!(*c != ratio(0, 1));
            }
        }
    }

    #[test]
    fn rationals_are_canonical(n in -50i64..50, d in 1i64..50, m in -50i64..50, e in -50i64..50) {
        prop_assume!(e != 0);
        for q in [ratio(n, d), ratio(n, d) + ratio(m, e), ratio(n, d) * ratio(m, e), ratio(m, e)] {
            prop_assert!(*q.denom() > 0.into());
            prop_assert_eq!(num_integer::Integer::gcd(q.numer(), q.denom()), if *q.numer() == 0.into() { q.denom().clone() } else { 1.into() });
            prop_assert_eq!(parse_rational(&format_rational(&q)), Some(q.clone()));
        }
        prop_assert_eq!(format_rational(&ratio(0, d)), "0");
    }

    #[test]
    fn tvalues_are_totally_ordered(a in tvalue(), b in tvalue(), c in tvalue()) {
        prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
        prop_assert_eq!(a == b, a.cmp(&b).is_eq());
        if a <= b && b <= c {
            prop_assert!(a <= c);
        }
        let rank = |t: &TValue| match t {
            TValue::Gamma(_) => 0,
            TValue::Pair { .. } => 1,
            TValue::Infinity => 2,
        };
        if rank(&a) < rank(&b) {
            prop_assert!(a < b);
        }
        let fa = FValue(vec![a.clone(), b.clone()]);
        let fb = FValue(vec![a.clone(), c.clone()]);
        prop_assert_eq!(fa.cmp(&fb), b.cmp(&c));
    }
}

#[test]
fn decomposition_of_two_points_and_a_line_succeeds() {
    let r = ring3();
    let x = |i: usize| Polynomial::var(&r, i);
    let one = Polynomial::one(&r);
    let a = Ideal::new(&r, vec![x(0), &x(1) * &x(2)]);
    let b = Ideal::new(&r, vec![&x(1) - &one, x(2)]);
    let input = a.intersect(&b).power(2);
    let primes = minimal_primes(&input).unwrap();
    assert_eq!(primes.len(), 3);
    assert!(intersect_all(&primes).unwrap().same_radical(&input));
}
