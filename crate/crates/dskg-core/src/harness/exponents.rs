//! Exact rational arithmetic for the exponent conditions: wave
//! admissibility `2/p + (n-1)/q <= (n-1)/2` and the scaling relation
//! `1/p + n/q = n/2 + eps - s`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Rational = Ratio<i64>;

/// A Lebesgue exponent in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn from_int(v: i64) -> Self {
        Exponent::Finite(Rational::from_integer(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Exponent::Finite(Rational::new(num, den))
    }

    /// Exact reciprocal, with `1/inf = 0`.
    pub fn recip(&self) -> Rational {
        match self {
            Exponent::Finite(r) => r.recip(),
            Exponent::Infinity => Rational::from_integer(0),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Exponent::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
    pub fn conjugate(&self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::from_int(1),
            Exponent::Finite(r) => {
                if *r == Rational::from_integer(1) {
                    Exponent::Infinity
                } else {
                    Exponent::Finite(*r / (*r - Rational::from_integer(1)))
                }
            }
        }
    }

    pub fn ge_int(&self, v: i64) -> bool {
        match self {
            Exponent::Infinity => true,
            Exponent::Finite(r) => *r >= Rational::from_integer(v),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

/// Wave admissibility `2/p + (n-1)/q <= (n-1)/2`, exact.
pub fn admissible(p: &Exponent, q: &Exponent, n: usize) -> bool {
    let n1 = Rational::from_integer(n as i64 - 1);
    let lhs = Rational::from_integer(2) * p.recip() + n1 * q.recip();
    lhs <= n1 / Rational::from_integer(2)
}

/// Scaling relation: `s = n/2 + eps - 1/p - n/q`, exact.
pub fn scaling_s(p: &Exponent, q: &Exponent, n: usize, eps: Rational) -> Rational {
    let nr = Rational::from_integer(n as i64);
    nr / Rational::from_integer(2) + eps - p.recip() - nr * q.recip()
}

/// An exponent tuple `(p, q, s, eps)` with its validity verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub p: Exponent,
    pub q: Exponent,
    pub s: Rational,
    pub eps: Rational,
    pub admissible: bool,
    /// `None` when usable; otherwise the violated condition.
    pub rejection: Option<String>,
}

impl ExponentTriple {
    /// Build from `(p, q, eps)`, deriving `s` from the scaling relation and
    /// checking the hypotheses (`p, q >= 2`, `q != inf`, wave admissibility).
    pub fn derive(p: Exponent, q: Exponent, eps: Rational, n: usize) -> Self {
        let s = scaling_s(&p, &q, n, eps);
        let rejection = if q == Exponent::Infinity {
            Some("q = inf excluded".to_string())
        } else if !p.ge_int(2) {
            Some(format!("p = {p} < 2"))
        } else if !q.ge_int(2) {
            Some(format!("q = {q} < 2"))
        } else if !admissible(&p, &q, n) {
            Some(format!("not wave admissible: 2/{p} + {}/{q} > {}/2", n - 1, n - 1))
        } else {
            None
        };
        let admissible = rejection.is_none();
        Self {
            p,
            q,
            s,
            eps,
            admissible,
            rejection,
        }
    }

    pub fn s_f64(&self) -> f64 {
        *self.s.numer() as f64 / *self.s.denom() as f64
    }

    pub fn eps_f64(&self) -> f64 {
        *self.eps.numer() as f64 / *self.eps.denom() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissibility_boundary_cases() {
        // (p, q) = (inf, 2): 0 + (n-1)/2 <= (n-1)/2, boundary
        assert!(admissible(&Exponent::Infinity, &Exponent::from_int(2), 3));
        // (4, 4) at n = 3: 1/2 + 1/2 = 1 = (n-1)/2, boundary
        assert!(admissible(&Exponent::from_int(4), &Exponent::from_int(4), 3));
        // (2, 4) at n = 3: 1 + 1/2 > 1
        assert!(!admissible(&Exponent::from_int(2), &Exponent::from_int(4), 3));
    }

    #[test]
    fn scaling_examples() {
        // s(4, 4, n=3, eps=0) = 3/2 - 1/4 - 3/4 = 1/2
        let s = scaling_s(
            &Exponent::from_int(4),
            &Exponent::from_int(4),
            3,
            Rational::from_integer(0),
        );
        assert_eq!(s, Rational::new(1, 2));
        // exactness: (p, q) = (8, 3), eps = 1/10
        let s2 = scaling_s(
            &Exponent::from_int(8),
            &Exponent::from_int(3),
            3,
            Rational::new(1, 10),
        );
        assert_eq!(s2, Rational::new(3, 2) + Rational::new(1, 10) - Rational::new(1, 8) - Rational::new(1, 1));
    }

    #[test]
    fn q_infinity_rejected() {
        let t = ExponentTriple::derive(
            Exponent::from_int(2),
            Exponent::Infinity,
            Rational::from_integer(0),
            3,
        );
        assert!(!t.admissible);
        assert_eq!(t.rejection.as_deref(), Some("q = inf excluded"));
    }

    #[test]
    fn conjugates() {
        assert_eq!(Exponent::from_int(4).conjugate(), Exponent::ratio(4, 3));
        assert_eq!(Exponent::from_int(2).conjugate(), Exponent::from_int(2));
        assert_eq!(Exponent::from_int(1).conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::from_int(1));
    }

    #[test]
    fn derive_keeps_valid_triple() {
        let t = ExponentTriple::derive(
            Exponent::from_int(4),
            Exponent::from_int(4),
            Rational::from_integer(0),
            3,
        );
        assert!(t.admissible);
        assert_eq!(t.s, Rational::new(1, 2));
        assert_eq!(t.s_f64(), 0.5);
    }
}
