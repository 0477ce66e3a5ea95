//! Exact commutative algebra over Q and a constructive resolution engine:
//! Groebner bases, blowup charts, resolution invariants and the strong resolution driver.

pub mod automorphism;
pub mod chart;
pub mod error;
pub mod gcd;
pub mod groebner;
pub mod ideal;
pub mod invariants;
pub mod monomial;
pub mod poly;
pub mod primes;
pub mod rational;
pub mod resolver;
pub mod sample;

pub use automorphism::{Automorphism, Move};
pub use error::{Error, Result};
pub use groebner::GroebnerBasis;
pub use monomial::{Exp, MonomialOrder};
pub use poly::{Polynomial, Ring, RingRef};
pub use rational::Rational;
pub use ideal::Ideal;
