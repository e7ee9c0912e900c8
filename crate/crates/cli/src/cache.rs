//! On-disk cache of enumerated windows, enabled by `LIMSUP_CACHE_DIR`.
//!
//! File layout: the magic `LSEC`, a little-endian `u32` format version, an element count,
//! then one record per element.

use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use limsup::geometry::Ball;
use limsup::systems::{Geometry, Provenance, ResonantElement, ResonantSystem};

pub const CACHE_ENV: &str = "LIMSUP_CACHE_DIR";
pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"LSEC";

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// File name for a system, weight window and restriction.
pub fn key(sys: &ResonantSystem, lo: u64, hi: u64, restrict: Option<&Ball>) -> String {
    let ball = match restrict {
        None => "all".to_string(),
        Some(Ball::Interval { center, radius }) => format!("i{:x}-{:x}", center.to_bits(), radius.to_bits()),
        Some(Ball::Arc { center, radius }) => format!("a{:x}-{:x}", center.to_bits(), radius.to_bits()),
        Some(Ball::Disc { cx, cy, radius }) => format!("d{:x}-{:x}-{:x}", cx.to_bits(), cy.to_bits(), radius.to_bits()),
    };
    let mode = format!("{:?}", sys.rational_mode).to_lowercase();
    let kind = sys.kind.to_string().replace(':', "");
    format!("v{FORMAT_VERSION}-{kind}-{mode}-q{}-{lo}-{hi}-{ball}.bin", u8::from(sys.first_quadrant))
}

fn put_u64(w: &mut impl Write, x: u64) -> io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_i64(w: &mut impl Write, x: i64) -> io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn get<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn get_u64(r: &mut impl Read) -> io::Result<u64> {
    Ok(u64::from_le_bytes(get(r)?))
}

fn get_i64(r: &mut impl Read) -> io::Result<i64> {
    Ok(i64::from_le_bytes(get(r)?))
}

fn bad(msg: &str) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.to_string())
}

pub fn encode(elements: &[ResonantElement], w: &mut impl Write) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    put_u64(w, elements.len() as u64)?;
    for el in elements {
        put_u64(w, el.weight)?;
        match el.geometry {
            Geometry::Point { num, den } => {
                w.write_all(&[0])?;
                w.write_all(&num.to_le_bytes())?;
                w.write_all(&den.to_le_bytes())?;
            }
            Geometry::Real { x } => {
                w.write_all(&[1])?;
                put_u64(w, x.to_bits())?;
            }
            Geometry::CirclePoint { p1, p2, q, angle } => {
                w.write_all(&[2])?;
                for v in [p1, p2, q] {
                    put_i64(w, v)?;
                }
                put_u64(w, angle.to_bits())?;
            }
            Geometry::Line { p, q1, q2 } => {
                w.write_all(&[3])?;
                for v in [p, q1, q2] {
                    put_i64(w, v)?;
                }
            }
        }
        match &el.provenance {
            Provenance::Pair { p, q } => {
                w.write_all(&[0])?;
                put_i64(w, *p)?;
                put_i64(w, *q)?;
            }
            Provenance::Poly { coeffs } => {
                w.write_all(&[1])?;
                put_u64(w, coeffs.len() as u64)?;
                for &c in coeffs {
                    put_i64(w, c)?;
                }
            }
            Provenance::Triple { p1, p2, q } => {
                w.write_all(&[2])?;
                for v in [*p1, *p2, *q] {
                    put_i64(w, v)?;
                }
            }
            Provenance::LineCoeffs { p, q1, q2 } => {
                w.write_all(&[3])?;
                for v in [*p, *q1, *q2] {
                    put_i64(w, v)?;
                }
            }
        }
    }
    Ok(())
}

pub fn decode(r: &mut impl Read) -> io::Result<Vec<ResonantElement>> {
    if &get::<4>(r)? != MAGIC {
        return Err(bad("not a cache file"));
    }
    if u32::from_le_bytes(get(r)?) != FORMAT_VERSION {
        return Err(bad("cache format version mismatch"));
    }
    let n = get_u64(r)?;
    let mut out = Vec::with_capacity(n.min(1 << 20) as usize);
    for _ in 0..n {
        let weight = get_u64(r)?;
        let geometry = match get::<1>(r)?[0] {
            0 => Geometry::Point { num: i128::from_le_bytes(get(r)?), den: i128::from_le_bytes(get(r)?) },
            1 => Geometry::Real { x: f64::from_bits(get_u64(r)?) },
            2 => Geometry::CirclePoint {
                p1: get_i64(r)?,
                p2: get_i64(r)?,
                q: get_i64(r)?,
                angle: f64::from_bits(get_u64(r)?),
            },
            3 => Geometry::Line { p: get_i64(r)?, q1: get_i64(r)?, q2: get_i64(r)? },
            _ => return Err(bad("bad geometry tag")),
        };
        let provenance = match get::<1>(r)?[0] {
            0 => Provenance::Pair { p: get_i64(r)?, q: get_i64(r)? },
            1 => {
                let len = get_u64(r)?;
                if len > 64 {
                    return Err(bad("polynomial too long"));
                }
                Provenance::Poly { coeffs: (0..len).map(|_| get_i64(r)).collect::<io::Result<_>>()? }
            }
            2 => Provenance::Triple { p1: get_i64(r)?, p2: get_i64(r)?, q: get_i64(r)? },
            3 => Provenance::LineCoeffs { p: get_i64(r)?, q1: get_i64(r)?, q2: get_i64(r)? },
            _ => return Err(bad("bad provenance tag")),
        };
        out.push(ResonantElement { weight, geometry, provenance });
    }
    Ok(out)
}

pub fn load(path: &Path) -> io::Result<Vec<ResonantElement>> {
    decode(&mut io::BufReader::new(std::fs::File::open(path)?))
}

/// Writes atomically through a temporary file in the same directory.
pub fn store(path: &Path, elements: &[ResonantElement]) -> io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        encode(elements, &mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use limsup::systems::{enumerate_weights, SystemKind};

    #[test]
    fn round_trip_every_system() {
        for (kind, lo, hi) in [
            (SystemKind::Rationals, 5, 12),
            (SystemKind::Algebraic(2), 0, 3),
            (SystemKind::Circle, 0, 30),
            (SystemKind::Lines21, 0, 3),
        ] {
            let sys = ResonantSystem::new(kind, 2.0);
            let els = enumerate_weights(&sys, lo, hi, None).unwrap();
            assert!(!els.is_empty(), "{kind}");
            let mut buf = Vec::new();
            encode(&els, &mut buf).unwrap();
            assert_eq!(decode(&mut buf.as_slice()).unwrap(), els, "{kind}");
        }
    }

    #[test]
    fn version_is_checked() {
        let mut buf = Vec::new();
        encode(&[], &mut buf).unwrap();
        buf[4] ^= 0xff;
        assert!(decode(&mut buf.as_slice()).is_err());
        assert!(decode(&mut &b"nope"[..]).is_err());
    }

    #[test]
    fn keys_separate_windows_and_balls() {
        let sys = ResonantSystem::rationals(6.0);
        let a = key(&sys, 1, 6, None);
        assert_ne!(a, key(&sys, 6, 36, None));
        assert_ne!(a, key(&sys, 1, 6, Some(&Ball::interval(0.5, 0.1))));
        assert!(a.starts_with("v1-rationals-"));
    }
}
