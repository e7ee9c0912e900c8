//! Reduced fractions of bounded denominator inside an interval, in increasing order.
//!
//! The start is located by a Stern–Brocot descent that jumps whole runs of mediants, so it
//! costs O(log N) big-integer steps; the walk itself uses the neighbour recurrence
//! `(a/b, c/d) ↦ (c/d, (kc−a)/(kd−b))` with `k = ⌊(N+b)/d⌋`.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub type Frac = (u128, u128);

fn big(x: u128) -> BigInt {
    BigInt::from(x)
}

fn to_u128(x: &BigInt) -> u128 {
    u128::try_from(x.clone()).expect("Farey term fits in u128")
}

/// Consecutive terms `L ≤ x < R` of the Farey sequence of order `n`, for `0 ≤ x < 1`.
/// For `x ≥ 1` returns `(1/1, 1/0)`.
pub fn neighbours(x: &BigRational, n: u64) -> (Frac, Frac) {
    assert!(n >= 1, "Farey order must be positive");
    if *x >= BigRational::one() {
        return ((1, 1), (1, 0));
    }
    let x = if x.is_negative() { BigRational::zero() } else { x.clone() };
    let (xn, xd) = (x.numer().clone(), x.denom().clone());
    let nn = big(n as u128);
    let (mut la, mut lb) = (BigInt::zero(), BigInt::one());
    let (mut ra, mut rb) = (BigInt::one(), BigInt::one());
    loop {
        // Largest j with (L + jR) ≤ x and denominator ≤ n.
        let gap_r = &xd * &ra - &xn * &rb;
        let gap_l = &xn * &lb - &xd * &la;
        let cap_l = (&nn - &lb).div_floor(&rb);
        let jl = gap_l.div_floor(&gap_r).min(cap_l);
        if jl.is_positive() {
            la += &jl * &ra;
            lb += &jl * &rb;
            continue;
        }
        // Largest j with (R + jL) > x and denominator ≤ n.
        let cap_r = (&nn - &rb).div_floor(&lb);
        let jr = if gap_l.is_zero() {
            cap_r
        } else {
            let q = gap_r.div_ceil(&gap_l) - BigInt::one();
            q.min(cap_r)
        };
        if jr.is_positive() {
            ra += &jr * &la;
            rb += &jr * &lb;
            continue;
        }
        break;
    }
    ((to_u128(&la), to_u128(&lb)), (to_u128(&ra), to_u128(&rb)))
}

/// Iterator over reduced `a/b ∈ [lo, hi] ∩ [0,1]` with `b ≤ n`, increasing.
pub struct FareyWalk {
    n: u128,
    cur: Frac,
    next: Frac,
    last: Frac,
    done: bool,
}

impl FareyWalk {
    pub fn new(lo: &BigRational, hi: &BigRational, n: u64) -> Self {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let lo = if *lo < zero { zero.clone() } else { lo.clone() };
        let hi = if *hi > one { one } else { hi.clone() };
        let empty = Self { n: n as u128, cur: (0, 1), next: (1, 1), last: (0, 1), done: true };
        if hi < lo || hi < zero {
            return empty;
        }
        let (l, r) = neighbours(&lo, n);
        let at_lo = BigRational::new(big(l.0).into(), big(l.1).into()) == lo;
        let (start, after) = if at_lo { (l, r) } else { (r, next_term(l, r, n as u128)) };
        let (last, _) = neighbours(&hi, n);
        // start > last means nothing inside.
        if start.1 == 0 || start.0 * last.1 > last.0 * start.1 {
            return empty;
        }
        Self { n: n as u128, cur: start, next: after, last, done: false }
    }
}

fn next_term(a: Frac, c: Frac, n: u128) -> Frac {
    if c.1 == 0 {
        return (1, 0);
    }
    if n < (1u128 << 31) {
        let (n, a0, b0, c0, d0) = (n as u64, a.0 as u64, a.1 as u64, c.0 as u64, c.1 as u64);
        let k = (n + b0) / d0;
        ((k * c0 - a0) as u128, (k * d0 - b0) as u128)
    } else {
        let k = (n + a.1) / c.1;
        (k * c.0 - a.0, k * c.1 - a.1)
    }
}

impl Iterator for FareyWalk {
    type Item = Frac;

    fn next(&mut self) -> Option<Frac> {
        if self.done {
            return None;
        }
        let out = self.cur;
        if out == self.last || self.next.1 == 0 {
            self.done = true;
        } else {
            let nn = next_term(self.cur, self.next, self.n);
            self.cur = self.next;
            self.next = nn;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::integer::gcd;

    fn brute(n: u128, lo: (i64, i64), hi: (i64, i64)) -> Vec<Frac> {
        let mut v = Vec::new();
        for b in 1..=n {
            for a in 0..=b {
                if gcd(a, b) != 1 {
                    continue;
                }
                let ge = (a as i128) * (lo.1 as i128) >= (lo.0 as i128) * (b as i128);
                let le = (a as i128) * (hi.1 as i128) <= (hi.0 as i128) * (b as i128);
                if ge && le {
                    v.push((a, b));
                }
            }
        }
        v.sort_by(|x, y| (x.0 * y.1).cmp(&(y.0 * x.1)));
        v
    }

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn matches_brute_force() {
        for n in 1..=40u64 {
            for (lo, hi) in [((0, 1), (1, 1)), ((1, 3), (1, 2)), ((2, 7), (5, 7)), ((3, 10), (3, 10)), ((1, 5), (1, 7))] {
                let got: Vec<_> = FareyWalk::new(&r(lo.0, lo.1), &r(hi.0, hi.1), n).collect();
                assert_eq!(got, brute(n as u128, lo, hi), "n={n} lo={lo:?} hi={hi:?}");
            }
        }
    }

    #[test]
    fn full_count_of_order_100() {
        // |F_100| = 1 + Σ φ(q) = 3045
        assert_eq!(FareyWalk::new(&r(0, 1), &r(1, 1), 100).count(), 3045);
    }

    #[test]
    fn large_order_tiny_interval() {
        let n = 1_000_000_000u64;
        let lo = r(41421356, 100000000);
        let hi = &lo + r(1, 10_000_000_000_000);
        let v: Vec<_> = FareyWalk::new(&lo, &hi, n).collect();
        assert!(!v.is_empty());
        for w in v.windows(2) {
            // consecutive Farey terms: bc − ad = 1
            assert_eq!(w[1].0 * w[0].1 - w[0].0 * w[1].1, 1);
        }
    }
}
