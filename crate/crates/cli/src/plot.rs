//! Plot-ready text and image outputs.

use std::fmt::Write as _;

use apwt::transform::{Diagram, Peak};
use serde::Serialize;

/// Linear map of a heatmap to 16-bit grey levels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeatmapScaling {
    /// Value drawn as 0.
    pub min: f64,
    /// Value drawn as 65535.
    pub max: f64,
    pub rows: &'static str,
    pub columns: &'static str,
}

/// Binary 16-bit PGM of the diagram: one row per `a` (ascending from the
/// top), one column per `φ` (ascending), levels `round(65535 (S - min)/(max - min))`.
pub fn diagram_pgm(d: &Diagram) -> (Vec<u8>, HeatmapScaling) {
    let (rows, cols) = d.values.dim();
    let (min, max) = (d.min(), d.max());
    let span = max - min;
    let mut out = format!("P5\n{cols} {rows}\n65535\n").into_bytes();
    out.reserve(2 * rows * cols);
    for v in d.values.iter() {
        let level = if span > 0.0 { ((v - min) / span * 65535.0).round() as u16 } else { 0 };
        out.extend_from_slice(&level.to_be_bytes());
    }
    (out, HeatmapScaling { min, max, rows: "a ascending", columns: "phi ascending" })
}

pub fn diagram_csv(d: &Diagram) -> Vec<u8> {
    let mut out = Vec::new();
    d.write_csv(&mut out).expect("writing to memory");
    out
}

pub fn peaks_csv(peaks: &[Peak]) -> Vec<u8> {
    let mut s = String::from("a,phi,omega,v_over_c,height\n");
    for p in peaks {
        writeln!(s, "{},{},{},{},{}", p.a, p.phi, p.omega, p.v_over_c, p.height).expect("writing to a string");
    }
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn pgm_header_and_extremes() {
        let d = Diagram::new(vec![1.0, 2.0], vec![0.0, 0.1, 0.2], array![[0.0, 1.0, 2.0], [4.0, 3.0, 2.0]]).unwrap();
        let (bytes, scaling) = diagram_pgm(&d);
        let header = b"P5\n3 2\n65535\n";
        assert_eq!(&bytes[..header.len()], header);
        let body = &bytes[header.len()..];
        assert_eq!(body.len(), 12);
        assert_eq!(&body[..2], &[0, 0]);
        assert_eq!(&body[6..8], &[255, 255]);
        assert_eq!((scaling.min, scaling.max), (0.0, 4.0));
    }

    #[test]
    fn flat_diagram_is_black() {
        let d = Diagram::new(vec![1.0], vec![0.0], array![[0.0]]).unwrap();
        let (bytes, _) = diagram_pgm(&d);
        assert!(bytes.ends_with(&[0, 0]));
    }
}
