//! QAM constellations and the bit-to-symbol mapper.
//!
//! The shipped tables live in `data/qam{16,64,128}.csv` as integer grid
//! coordinates. 16 and 64 are Gray-labelled squares. 128 is the 12x12 cross:
//! a Gray-labelled 16x8 rectangle whose two outer columns on each side are
//! folded onto the top and bottom rows, which leaves the labelling Gray inside
//! each region and quasi-Gray across the fold.

use std::io::Read;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{BitStream, SymbolStream};

const QAM16_CSV: &str = include_str!("../../data/qam16.csv");
const QAM64_CSV: &str = include_str!("../../data/qam64.csv");
const QAM128_CSV: &str = include_str!("../../data/qam128.csv");

/// Labelled constellation normalised to unit mean power.
#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    bits_per_symbol: u32,
    /// Point for each label value, indexed by label.
    points: Vec<Complex64>,
}

impl QamConstellation {
    /// One of the embedded tables: 16, 64 or 128.
    pub fn standard(order: usize) -> Result<Self> {
        let text = match order {
            16 => QAM16_CSV,
            64 => QAM64_CSV,
            128 => QAM128_CSV,
            _ => return Err(Error::invalid("order", format!("no embedded table for {order}-QAM"))),
        };
        Self::from_csv(text.as_bytes())
    }

    /// Loads a `label_bits,i,q` table. Points are rescaled to unit mean power.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["label_bits", "i", "q"] {
            return Err(Error::invalid("constellation", "header must be label_bits,i,q"));
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let label = rec[0].to_string();
            let i: f64 = rec[1].parse().map_err(|_| Error::invalid("constellation", format!("bad i `{}`", &rec[1])))?;
            let q: f64 = rec[2].parse().map_err(|_| Error::invalid("constellation", format!("bad q `{}`", &rec[2])))?;
            rows.push((label, Complex64::new(i, q)));
        }
        let order = rows.len();
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::invalid("constellation", format!("{order} points is not a power of two")));
        }
        let k = order.trailing_zeros();
        let mut points = vec![None; order];
        for (label, p) in rows {
            if label.len() != k as usize || !label.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::invalid("constellation", format!("label `{label}` is not {k} bits")));
            }
            let v = usize::from_str_radix(&label, 2).expect("validated binary label");
            if points[v].replace(p).is_some() {
                return Err(Error::invalid("constellation", format!("label `{label}` appears twice")));
            }
        }
        let mut points: Vec<Complex64> = points.into_iter().map(|p| p.expect("labels form a bijection")).collect();
        let power = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::invalid("constellation", "points have zero power"));
        }
        let scale = power.sqrt().recip();
        points.iter_mut().for_each(|p| *p *= scale);
        Ok(Self { order, bits_per_symbol: k, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    /// Point carrying `label` (bits MSB first).
    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn is_square(&self) -> bool {
        self.bits_per_symbol % 2 == 0
    }

    /// Minimum distance between distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (a, p) in self.points.iter().enumerate() {
            for q in &self.points[a + 1..] {
                d = d.min((p - q).norm());
            }
        }
        d
    }

    /// Label of the nearest point; exact ties go to the lowest label.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }

    /// Square-QAM-equivalent order used by the closed-form error-rate estimate.
    ///
    /// For a square constellation this is the order itself. For a cross it is
    /// `1 + 6 E_avg / d_min^2`, which reproduces the square relation between
    /// mean energy and minimum distance (the 128-point cross gives 124).
    pub fn effective_order(&self) -> f64 {
        if self.is_square() {
            return self.order as f64;
        }
        let d = self.min_distance();
        1.0 + 6.0 / (d * d)
    }
}

/// Maps each `log2(M)`-bit group (MSB first) to its labelled point.
pub fn qam_map(bits: &BitStream, c: &QamConstellation) -> Result<SymbolStream> {
    let k = c.bits_per_symbol as usize;
    if bits.len() % k != 0 {
        return Err(Error::invalid(
            "bits",
            format!("{} bits do not split into {k}-bit symbols", bits.len()),
        ));
    }
    let symbols = bits
        .bits()
        .chunks(k)
        .map(|g| c.point(g.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)))
        .collect();
    Ok(SymbolStream::from_parts(symbols, bits.bit_rate_hz() / k as f64, c.bits_per_symbol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_unit_power() {
        for m in [16, 64, 128] {
            let c = QamConstellation::standard(m).unwrap();
            assert_eq!(c.order(), m);
            let p = c.points().iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
            assert!((p - 1.0).abs() < 1e-12, "{m}: {p}");
        }
    }

    #[test]
    fn square_tables_are_gray() {
        for m in [16, 64] {
            let c = QamConstellation::standard(m).unwrap();
            let d = c.min_distance();
            for a in 0..m {
                for b in a + 1..m {
                    if ((c.point(a) - c.point(b)).norm() - d).abs() < 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1, "{m}-QAM labels {a:b} and {b:b}");
                    }
                }
            }
        }
    }

    #[test]
    fn cross_effective_order() {
        let c = QamConstellation::standard(128).unwrap();
        assert!(!c.is_square());
        assert!((c.effective_order() - 124.0).abs() < 1e-9);
        assert_eq!(QamConstellation::standard(64).unwrap().effective_order(), 64.0);
    }

    #[test]
    fn unsupported_order() {
        assert!(QamConstellation::standard(32).is_err());
    }

    #[test]
    fn rejects_duplicate_labels() {
        let csv = "label_bits,i,q\n00,1,1\n01,-1,1\n01,1,-1\n11,-1,-1\n";
        assert!(QamConstellation::from_csv(csv.as_bytes()).is_err());
        let ok = "label_bits,i,q\n00,1,1\n01,-1,1\n10,1,-1\n11,-1,-1\n";
        assert_eq!(QamConstellation::from_csv(ok.as_bytes()).unwrap().order(), 4);
    }

    #[test]
    fn map_rejects_ragged_bits() {
        let c = QamConstellation::standard(16).unwrap();
        let b = BitStream::new(vec![0, 1, 1], 1e9).unwrap();
        assert!(qam_map(&b, &c).is_err());
        let empty = BitStream::new(vec![], 1e9).unwrap();
        assert!(qam_map(&empty, &c).unwrap().is_empty());
    }

    #[test]
    fn nearest_ties_go_to_lowest_label() {
        let c = QamConstellation::standard(16).unwrap();
        let origin = c.nearest(Complex64::new(0.0, 0.0));
        let d0 = c.point(origin).norm();
        let lowest = (0..16).find(|&l| (c.point(l).norm() - d0).abs() < 1e-12).unwrap();
        assert_eq!(origin, lowest);
    }
}
