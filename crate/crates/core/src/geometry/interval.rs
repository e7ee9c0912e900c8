//! Unions of closed intervals with fixed-point dyadic endpoints.
//!
//! Endpoints are integers in units of `2^-80`. Conversions from reals round inward by
//! default, so measures computed here never overstate the exact value.

use num::bigint::BigInt;
use num::rational::BigRational;

pub const SCALE_BITS: u32 = 80;
pub const ONE: i128 = 1 << SCALE_BITS;

fn scale() -> f64 {
    ONE as f64
}

pub fn fixed_floor(x: f64) -> i128 {
    (x * scale()).floor() as i128
}

pub fn fixed_ceil(x: f64) -> i128 {
    (x * scale()).ceil() as i128
}

/// `floor(p · 2^80 / q)` for `q > 0` and `|p| < 2^46`.
pub fn fixed_ratio_floor(p: i128, q: i128) -> i128 {
    (p << SCALE_BITS).div_euclid(q)
}

pub fn fixed_ratio_ceil(p: i128, q: i128) -> i128 {
    -((-p) << SCALE_BITS).div_euclid(q)
}

pub fn fixed_to_f64(x: i128) -> f64 {
    x as f64 / scale()
}

pub fn fixed_to_rational(x: i128) -> BigRational {
    BigRational::new(BigInt::from(x), BigInt::from(ONE))
}

/// Inward-rounded `[c - r, c + r]` around an exact rational center.
pub fn rational_interval_inward(p: i128, q: i128, r: f64) -> (i128, i128) {
    let rf = fixed_floor(r);
    (fixed_ratio_ceil(p, q) - rf, fixed_ratio_floor(p, q) + rf)
}

/// Inward-rounded `[c - r, c + r]` around a real center.
pub fn real_interval_inward(c: f64, r: f64) -> (i128, i128) {
    (fixed_ceil(c - r), fixed_floor(c + r))
}

/// Outward-rounded `[c - r, c + r]`.
pub fn real_interval_outward(c: f64, r: f64) -> (i128, i128) {
    (fixed_floor(c - r), fixed_ceil(c + r))
}

/// Sorted, pairwise disjoint, nonempty closed intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalUnion {
    iv: Vec<(i128, i128)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Normalizes arbitrary pairs: drops empty ones, sorts and merges touching intervals.
    pub fn new(mut raw: Vec<(i128, i128)>) -> Self {
        raw.retain(|&(a, b)| a < b);
        raw.sort_unstable();
        let mut iv: Vec<(i128, i128)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match iv.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => iv.push((a, b)),
            }
        }
        Self { iv }
    }

    pub fn from_f64(pairs: &[(f64, f64)]) -> Self {
        Self::new(pairs.iter().map(|&(a, b)| (fixed_ceil(a), fixed_floor(b))).collect())
    }

    pub fn intervals(&self) -> &[(i128, i128)] {
        &self.iv
    }

    pub fn intervals_f64(&self) -> Vec<(f64, f64)> {
        self.iv.iter().map(|&(a, b)| (fixed_to_f64(a), fixed_to_f64(b))).collect()
    }

    pub fn len(&self) -> usize {
        self.iv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iv.is_empty()
    }

    pub fn measure_fixed(&self) -> i128 {
        self.iv.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn measure(&self) -> f64 {
        fixed_to_f64(self.measure_fixed())
    }

    pub fn measure_exact(&self) -> BigRational {
        fixed_to_rational(self.measure_fixed())
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.iv.len() && j < other.iv.len() {
            let (a, b) = self.iv[i];
            let (c, d) = other.iv[j];
            let (lo, hi) = (a.max(c), b.min(d));
            if lo < hi {
                out.push((lo, hi));
            }
            if b < d {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { iv: out }
    }

    pub fn clip(&self, lo: i128, hi: i128) -> Self {
        self.intersect(&Self::new(vec![(lo, hi)]))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.iv.clone();
        v.extend_from_slice(&other.iv);
        Self::new(v)
    }
}

/// Union measure of intervals pushed in nondecreasing order of left endpoint, clipped.
#[derive(Clone, Debug)]
pub struct StreamingUnion {
    clip: (i128, i128),
    cur: Option<(i128, i128)>,
    total: i128,
    pieces: u64,
}

impl StreamingUnion {
    pub fn new(clip_lo: i128, clip_hi: i128) -> Self {
        Self { clip: (clip_lo, clip_hi), cur: None, total: 0, pieces: 0 }
    }

    pub fn push(&mut self, a: i128, b: i128) {
        let (a, b) = (a.max(self.clip.0), b.min(self.clip.1));
        if a >= b {
            return;
        }
        match &mut self.cur {
            Some(c) if a <= c.1 => {
                debug_assert!(a >= c.0, "stream out of order");
                c.1 = c.1.max(b);
            }
            _ => {
                if let Some((x, y)) = self.cur.take() {
                    self.total += y - x;
                    self.pieces += 1;
                }
                self.cur = Some((a, b));
            }
        }
    }

    /// Total measure in fixed units and the number of disjoint pieces.
    pub fn finish(mut self) -> (i128, u64) {
        if let Some((x, y)) = self.cur.take() {
            self.total += y - x;
            self.pieces += 1;
        }
        (self.total, self.pieces)
    }
}

/// Arc unions on the circle, stored in turns so the full circle has measure 1.
pub fn arc_pieces(center: f64, radius: f64, inward: bool) -> Vec<(i128, i128)> {
    let tau = 2.0 * std::f64::consts::PI;
    if 2.0 * radius >= tau {
        return vec![(0, ONE)];
    }
    let t = center.rem_euclid(tau) / tau;
    let h = radius / tau;
    let (lo, hi) = if inward { real_interval_inward(t, h) } else { real_interval_outward(t, h) };
    if lo >= hi {
        return vec![];
    }
    let mut out = Vec::with_capacity(2);
    if lo < 0 {
        out.push((lo + ONE, ONE));
        out.push((0, hi));
    } else if hi > ONE {
        out.push((lo, ONE));
        out.push((0, hi - ONE));
    } else {
        out.push((lo, hi));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_merge() {
        let u = IntervalUnion::from_f64(&[(0.0, 0.5), (0.25, 0.75)]);
        assert_eq!(u.len(), 1);
        assert_eq!(u.measure(), 0.75);
        assert_eq!(u.measure_exact(), BigRational::new(3.into(), 4.into()));
    }

    #[test]
    fn rounding_is_inward() {
        let (a, b) = rational_interval_inward(1, 3, 0.1);
        let exact_len = BigRational::from_float(0.1).unwrap() * BigRational::from_integer(2.into());
        let got = fixed_to_rational(b - a);
        assert!(got <= exact_len);
        assert!(&exact_len - got < BigRational::new(4.into(), BigInt::from(ONE)));
        let (c, d) = rational_interval_inward(1, 3, 0.0);
        assert!(c > d);
    }

    #[test]
    fn streaming_matches_batch() {
        let raw: Vec<(i128, i128)> = (0..200).map(|i| (i * 7 % 50, i * 7 % 50 + (i % 5))).collect();
        let batch = IntervalUnion::new(raw.clone()).clip(3, 45);
        let mut sorted = raw;
        sorted.sort();
        let mut s = StreamingUnion::new(3, 45);
        for (a, b) in sorted {
            s.push(a, b);
        }
        let (m, pieces) = s.finish();
        assert_eq!(m, batch.measure_fixed());
        assert_eq!(pieces as usize, batch.len());
    }

    #[test]
    fn arcs_wrap() {
        let pieces = arc_pieces(0.0, 0.1, true);
        assert_eq!(pieces.len(), 2);
        let u = IntervalUnion::new(pieces);
        let want = 0.2 / (2.0 * std::f64::consts::PI);
        assert!((u.measure() - want).abs() < 1e-15);
        assert_eq!(IntervalUnion::new(arc_pieces(1.0, 4.0, true)).measure(), 1.0);
    }

    #[test]
    fn intersection() {
        let a = IntervalUnion::from_f64(&[(0.0, 0.25), (0.5, 1.0)]);
        let b = IntervalUnion::from_f64(&[(0.125, 0.625)]);
        assert_eq!(a.intersect(&b).measure(), 0.25);
    }
}
