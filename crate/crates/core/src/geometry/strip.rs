//! Strips around lines in the unit square: exact areas by polygon clipping and disc
//! decomposition, unions by stratified Monte Carlo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Pt = (f64, f64);

const Z99: f64 = 2.576;

pub fn unit_square() -> Vec<Pt> {
    vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
}

/// Keeps `{a x + b y ≤ c}` of a convex polygon.
pub fn clip_halfplane(poly: &[Pt], a: f64, b: f64, c: f64) -> Vec<Pt> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let val = |p: Pt| a * p.0 + b * p.1 - c;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (vp, vq) = (val(p), val(q));
        if vp <= 0.0 {
            out.push(p);
        }
        if (vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0) {
            let t = vp / (vp - vq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// Signed (shoelace) area.
pub fn polygon_area(poly: &[Pt]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p.0 * q.1 - p.1 * q.0
        })
        .sum::<f64>()
        * 0.5
}

fn cross(a: Pt, b: Pt) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn dot(a: Pt, b: Pt) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// Signed area of the disc of radius `r` at the origin intersected with triangle `(0, a, b)`.
fn disc_triangle(a: Pt, b: Pt, r: f64) -> f64 {
    let d = (b.0 - a.0, b.1 - a.1);
    let (qa, qb, qc) = (dot(d, d), 2.0 * dot(a, d), dot(a, a) - r * r);
    let mut ts = vec![0.0];
    if qa > 0.0 {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc > 0.0 {
            let s = disc.sqrt();
            for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
    }
    ts.push(1.0);
    let at = |t: f64| (a.0 + t * d.0, a.1 + t * d.1);
    ts.windows(2)
        .map(|w| {
            let (p0, p1) = (at(w[0]), at(w[1]));
            let mid = at(0.5 * (w[0] + w[1]));
            if dot(mid, mid) <= r * r {
                0.5 * cross(p0, p1)
            } else {
                0.5 * r * r * cross(p0, p1).atan2(dot(p0, p1))
            }
        })
        .sum()
}

/// Area of a disc intersected with a counter-clockwise convex polygon.
pub fn disc_polygon_area(cx: f64, cy: f64, r: f64, poly: &[Pt]) -> f64 {
    if r <= 0.0 || poly.len() < 3 {
        return 0.0;
    }
    let n = poly.len();
    let rel: Vec<Pt> = poly.iter().map(|p| (p.0 - cx, p.1 - cy)).collect();
    let s: f64 = (0..n).map(|i| disc_triangle(rel[i], rel[(i + 1) % n], r)).sum();
    s.max(0.0)
}

pub fn disc_square_area(cx: f64, cy: f64, r: f64) -> f64 {
    disc_polygon_area(cx, cy, r, &unit_square())
}

/// Slab `{|q₁x + q₂y − p| < half·|q|}` around the line `q₁x + q₂y = p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub p: i64,
    pub q1: i64,
    pub q2: i64,
    pub half: f64,
}

impl Strip {
    pub fn norm(&self) -> f64 {
        ((self.q1 * self.q1 + self.q2 * self.q2) as f64).sqrt()
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        (self.q1 as f64 * x + self.q2 as f64 * y - self.p as f64).abs() / self.norm()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.distance(x, y) < self.half
    }

    /// The strip clipped to `poly`.
    pub fn clip(&self, poly: &[Pt]) -> Vec<Pt> {
        let (a, b) = (self.q1 as f64, self.q2 as f64);
        let w = self.half * self.norm();
        let upper = clip_halfplane(poly, a, b, self.p as f64 + w);
        clip_halfplane(&upper, -a, -b, -(self.p as f64) + w)
    }

    pub fn polygon(&self) -> Vec<Pt> {
        self.clip(&unit_square())
    }
}

/// Exact area of `∩ strips ∩ square ∩ disc`.
fn intersection_area(strips: &[&Strip], disc: Option<(f64, f64, f64)>) -> f64 {
    let mut poly = unit_square();
    for s in strips {
        poly = s.clip(&poly);
        if poly.len() < 3 {
            return 0.0;
        }
    }
    match disc {
        None => polygon_area(&poly).max(0.0),
        Some((cx, cy, r)) => disc_polygon_area(cx, cy, r, &poly),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripUnion {
    pub strips: Vec<Strip>,
    pub samples: u64,
    pub seed: u64,
}

/// Unions of at most this many strips are measured exactly by inclusion–exclusion.
pub const EXACT_STRIPS: usize = 3;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

impl StripUnion {
    pub fn new(strips: Vec<Strip>) -> Self {
        Self { strips, samples: DEFAULT_SAMPLES, seed: 0 }
    }

    pub fn with_sampling(mut self, samples: u64, seed: u64) -> Self {
        self.samples = samples;
        self.seed = seed;
        self
    }

    /// Area inside the square (and the disc, if given) with a 99% error bound.
    pub fn measure(&self, disc: Option<(f64, f64, f64)>) -> (f64, f64) {
        let live: Vec<&Strip> = self.strips.iter().filter(|s| s.half > 0.0).collect();
        if live.is_empty() {
            return (0.0, 0.0);
        }
        if live.len() <= EXACT_STRIPS {
            let mut total = 0.0;
            for mask in 1u32..(1 << live.len()) {
                let pick: Vec<&Strip> = (0..live.len()).filter(|i| mask & (1 << i) != 0).map(|i| live[i]).collect();
                let sign = if pick.len() % 2 == 1 { 1.0 } else { -1.0 };
                total += sign * intersection_area(&pick, disc);
            }
            return (total.max(0.0), 0.0);
        }
        self.monte_carlo(&live, disc)
    }

    pub fn monte_carlo_estimate(&self, disc: Option<(f64, f64, f64)>) -> (f64, f64) {
        let live: Vec<&Strip> = self.strips.iter().filter(|s| s.half > 0.0).collect();
        self.monte_carlo(&live, disc)
    }

    fn monte_carlo(&self, live: &[&Strip], disc: Option<(f64, f64, f64)>) -> (f64, f64) {
        let (x0, x1, y0, y1) = match disc {
            None => (0.0, 1.0, 0.0, 1.0),
            Some((cx, cy, r)) => ((cx - r).max(0.0), (cx + r).min(1.0), (cy - r).max(0.0), (cy + r).min(1.0)),
        };
        if x1 <= x0 || y1 <= y0 || live.is_empty() {
            return (0.0, 0.0);
        }
        let g = ((self.samples as f64 / 16.0).sqrt().floor() as u64).max(1);
        let m = (self.samples / (g * g)).max(2);
        let (w, h) = ((x1 - x0) / g as f64, (y1 - y0) / g as f64);
        let cell_area = w * h;
        let half_diag = 0.5 * (w * w + h * h).sqrt();
        let (mut est, mut var) = (0.0, 0.0);
        let mut near: Vec<&Strip> = Vec::new();
        for i in 0..g {
            for j in 0..g {
                let (ax, ay) = (x0 + i as f64 * w, y0 + j as f64 * h);
                let (mx, my) = (ax + 0.5 * w, ay + 0.5 * h);
                near.clear();
                near.extend(live.iter().filter(|s| s.distance(mx, my) < s.half + half_diag));
                if near.is_empty() {
                    var += cell_area * cell_area / ((m + 2) as f64 * m as f64);
                    continue;
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(i * g + j);
                let mut hits = 0u64;
                for _ in 0..m {
                    let x = ax + w * rng.gen::<f64>();
                    let y = ay + h * rng.gen::<f64>();
                    let in_disc = disc.map_or(true, |(cx, cy, r)| (x - cx).powi(2) + (y - cy).powi(2) < r * r);
                    if in_disc && near.iter().any(|s| s.contains(x, y)) {
                        hits += 1;
                    }
                }
                est += cell_area * hits as f64 / m as f64;
                let pt = (hits as f64 + 1.0) / (m as f64 + 2.0);
                var += cell_area * cell_area * pt * (1.0 - pt) / m as f64;
            }
        }
        (est, Z99 * var.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disc_inside_square() {
        assert!((disc_square_area(0.5, 0.5, 0.2) - PI * 0.04).abs() < 1e-14);
        assert!((disc_square_area(0.0, 0.0, 0.3) - PI * 0.09 / 4.0).abs() < 1e-14);
        assert!((disc_square_area(0.5, 0.5, 2.0) - 1.0).abs() < 1e-14);
        assert!((disc_square_area(0.5, 0.0, 0.1) - PI * 0.01 / 2.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_strip_exact() {
        // x + y = 1, half-width 0.1: band of perpendicular width 0.2 across the diagonal,
        // minus the two corner triangles cut by the square.
        let s = Strip { p: 1, q1: 1, q2: 1, half: 0.1 };
        let area = polygon_area(&s.polygon());
        let t = 0.1 * 2f64.sqrt();
        let want = 1.0 - (1.0 - t).powi(2);
        assert!((area - want).abs() < 1e-14, "{area} vs {want}");
        let (mc, err) = StripUnion::new(vec![s, s, s, s]).with_sampling(200_000, 7).measure(None);
        assert!((mc - want).abs() < err.max(1e-3), "{mc} ± {err} vs {want}");
    }

    #[test]
    fn inclusion_exclusion_matches_sampling() {
        let strips = vec![
            Strip { p: 1, q1: 2, q2: 1, half: 0.05 },
            Strip { p: 1, q1: 1, q2: 3, half: 0.08 },
            Strip { p: 0, q1: 1, q2: -1, half: 0.03 },
        ];
        let u = StripUnion::new(strips).with_sampling(400_000, 3);
        let (exact, e0) = u.measure(None);
        assert_eq!(e0, 0.0);
        let (mc, err) = u.monte_carlo_estimate(None);
        assert!((mc - exact).abs() <= err, "{mc} ± {err} vs {exact}");
        let disc = Some((0.4, 0.3, 0.25));
        let (exact_d, _) = u.measure(disc);
        let (mc_d, err_d) = u.monte_carlo_estimate(disc);
        assert!((mc_d - exact_d).abs() <= err_d, "{mc_d} ± {err_d} vs {exact_d}");
    }
}
