//! Fixed enumerations of rationals via the Calkin–Wilf sequence.

use num_rational::Ratio;

pub type Q = Ratio<i128>;

/// Stern's diatomic pair `(s(k), s(k+1))`.
fn fusc_pair(k: u64) -> (u64, u64) {
    // Walk the bits of k from the top: s(2n) = s(n), s(2n+1) = s(n) + s(n+1).
    let (mut a, mut b) = (0u64, 1u64);
    for bit in (0..64).rev().map(|i| (k >> i) & 1) {
        if bit == 0 {
            b += a;
        } else {
            a += b;
        }
    }
    (a, b)
}

/// The k-th positive rational (k >= 1) of the Calkin–Wilf sequence:
/// 1, 1/2, 2, 1/3, 3/2, 2/3, 3, ...
pub fn calkin_wilf(k: u64) -> (u64, u64) {
    assert!(k >= 1, "Calkin-Wilf sequence starts at index 1");
    fusc_pair(k)
}

/// The j-th rational strictly between 0 and 1 (j >= 1): `a/(a+b)` for the
/// j-th Calkin–Wilf term `a/b`.
pub fn interior(j: u64) -> Q {
    let (a, b) = calkin_wilf(j);
    Q::new(a as i128, (a + b) as i128)
}

/// Enumeration of all of ℚ: 0, then each Calkin–Wilf term followed by its negation.
pub fn rational(k: u64) -> Q {
    if k == 0 {
        return Q::from_integer(0);
    }
    let (a, b) = calkin_wilf(k.div_ceil(2));
    let q = Q::new(a as i128, b as i128);
    if k % 2 == 1 {
        q
    } else {
        -q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn first_terms() {
        let cw: Vec<_> = (1..=7).map(calkin_wilf).collect();
        assert_eq!(cw, vec![(1, 1), (1, 2), (2, 1), (1, 3), (3, 2), (2, 3), (3, 1)]);
        assert_eq!(interior(1), Q::new(1, 2));
        assert_eq!(interior(2), Q::new(1, 3));
        assert_eq!(interior(3), Q::new(2, 3));
        assert_eq!(rational(0), Q::from_integer(0));
        assert_eq!(rational(1), Q::from_integer(1));
        assert_eq!(rational(2), Q::from_integer(-1));
        assert_eq!(rational(3), Q::new(1, 2));
    }

    #[test]
    fn no_repeats() {
        let seen: HashSet<Q> = (0..20_000).map(rational).collect();
        assert_eq!(seen.len(), 20_000);
        let inner: HashSet<Q> = (1..10_000).map(interior).collect();
        assert_eq!(inner.len(), 9_999);
        assert!(inner.iter().all(|q| *q > Q::from_integer(0) && *q < Q::from_integer(1)));
    }
}
