//! Real algebraic numbers of degree at most 3 in `[0,1]`, indexed by the height of their
//! minimal polynomial.

use num::integer::gcd;

use super::{Geometry, Provenance, ResonantElement};

const ROOT_TOL: f64 = 1e-14;

/// Evaluates `Σ c_i x^i` (ascending coefficients).
pub fn eval(c: &[i64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a as f64)
}

fn content(c: &[i64]) -> i64 {
    c.iter().fold(0, |g, &a| gcd(g, a))
}

fn divisors(n: i64) -> Vec<i64> {
    let n = n.abs();
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Whether `Σ c_i x^i` has a rational root (coefficients ascending, leading nonzero).
pub fn has_rational_root(c: &[i64]) -> bool {
    let a0 = c[0];
    if a0 == 0 {
        return true;
    }
    let lead = *c.last().expect("nonempty");
    for p in divisors(a0) {
        for q in divisors(lead) {
            for s in [p, -p] {
                // Σ c_i s^i q^{d-i} == 0, in i128.
                let d = c.len() - 1;
                let v: i128 = c
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| a as i128 * (s as i128).pow(i as u32) * (q as i128).pow((d - i) as u32))
                    .sum();
                if v == 0 {
                    return true;
                }
            }
        }
    }
    false
}

/// Irreducible over ℚ with content 1 and positive leading coefficient; degree 1 to 3.
pub fn is_minimal_polynomial(c: &[i64]) -> bool {
    let deg = c.len() - 1;
    if deg == 0 || deg > 3 || *c.last().unwrap() <= 0 || content(c) != 1 {
        return false;
    }
    deg == 1 || !has_rational_root(c)
}

fn bisect(c: &[i64], mut a: f64, mut b: f64) -> f64 {
    let mut fa = eval(c, a);
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        let fm = eval(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Roots in `[0,1]` of a squarefree polynomial of degree 2 or 3, ascending.
pub fn roots_in_unit(c: &[i64]) -> Vec<f64> {
    // Split at the critical points so each piece is monotone.
    let mut cuts = vec![0.0];
    let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, &a)| i as f64 * a as f64).collect();
    let mut crit = match deriv.len() {
        1 => vec![],
        2 => vec![-deriv[0] / deriv[1]],
        _ => {
            let (a, b, cc) = (deriv[2], deriv[1], deriv[0]);
            let disc = b * b - 4.0 * a * cc;
            if disc <= 0.0 {
                vec![]
            } else {
                let s = disc.sqrt();
                vec![(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)]
            }
        }
    };
    crit.sort_by(|a, b| a.total_cmp(b));
    cuts.extend(crit.into_iter().filter(|&x| x > 0.0 && x < 1.0));
    cuts.push(1.0);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval(c, a), eval(c, b));
        if fa == 0.0 {
            if roots.last() != Some(&a) {
                roots.push(a);
            }
        } else if fb == 0.0 {
            roots.push(b);
        } else if (fa < 0.0) != (fb < 0.0) {
            roots.push(bisect(c, a, b));
        }
    }
    roots
}

/// Calls `out` for each algebraic number in `[0,1]` whose minimal polynomial has degree
/// `≤ d` and height in `(lo, hi]`, in odometer order of the coefficient vector.
pub fn for_each(d: u32, lo: u64, hi: u64, mut out: impl FnMut(ResonantElement)) {
    let d = d as usize;
    let h = hi as i64;
    let mut c = vec![-h; d + 1];
    loop {
        let height = c.iter().map(|a| a.unsigned_abs()).max().unwrap();
        if height > lo {
            emit(&c, height, &mut out);
        }
        let mut i = 0;
        while i <= d && c[i] == h {
            c[i] = -h;
            i += 1;
        }
        if i > d {
            break;
        }
        c[i] += 1;
    }
}

fn emit(c: &[i64], height: u64, out: &mut impl FnMut(ResonantElement)) {
    let deg = match c.iter().rposition(|&a| a != 0) {
        Some(k) if k >= 1 => k,
        _ => return,
    };
    let poly = &c[..=deg];
    if !is_minimal_polynomial(poly) {
        return;
    }
    let coeffs = poly.to_vec();
    if deg == 1 {
        let (num, den) = (-poly[0], poly[1]);
        if num >= 0 && num <= den {
            out(ResonantElement {
                weight: height,
                geometry: Geometry::Point { num: num as i128, den: den as i128 },
                provenance: Provenance::Poly { coeffs },
            });
        }
        return;
    }
    for x in roots_in_unit(poly) {
        out(ResonantElement { weight: height, geometry: Geometry::Real { x }, provenance: Provenance::Poly { coeffs: coeffs.clone() } });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_polynomial_checks() {
        assert!(is_minimal_polynomial(&[-2, 0, 1]));
        assert!(!is_minimal_polynomial(&[-1, 0, 1]));
        assert!(!is_minimal_polynomial(&[0, 1, 1]));
        assert!(!is_minimal_polynomial(&[2, 0, 2]));
        assert!(!is_minimal_polynomial(&[2, 0, -1]));
        assert!(is_minimal_polynomial(&[-2, 0, 0, 1]));
        assert!(!is_minimal_polynomial(&[-8, 0, 0, 1]));
        assert!(is_minimal_polynomial(&[3, 5]));
    }

    #[test]
    fn golden_ratio_conjugate() {
        // x² + x − 1 has root (√5 − 1)/2.
        let r = roots_in_unit(&[-1, 1, 1]);
        assert_eq!(r.len(), 1);
        assert!((r[0] - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-13);
    }

    #[test]
    fn cubic_with_three_unit_roots() {
        // Roots near 0.1, 0.5, 0.9 of an irreducible perturbation.
        let c = [-44, 590, -1_500, 1_000];
        let roots = roots_in_unit(&c);
        for &x in &roots {
            assert!(eval(&c, x).abs() < 1e-9);
        }
        let sampled = (0..100_000)
            .filter(|&i| {
                let (a, b) = (i as f64 / 100_000.0, (i + 1) as f64 / 100_000.0);
                (eval(&c, a) < 0.0) != (eval(&c, b) < 0.0)
            })
            .count();
        assert_eq!(roots.len(), sampled);
    }
}
