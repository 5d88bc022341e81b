//! APWF/1 binary array container.
//!
//! The header is a run of 64-byte ASCII records padded with spaces. Record 0
//! is `APWF/1 <KIND>`, then one `key=value` record per field, then `END`.
//! Floats in the header use Rust's shortest round-trip formatting, so a
//! read-write cycle is bit-exact. The body is row-major little-endian
//! `(re, im)` f64 pairs.
//!
//! Kinds and their axes:
//!
//! | kind       | axes              |
//! |------------|-------------------|
//! | `SIGNAL`   | `ct, x`           |
//! | `SPECTRUM` | `omega, kx`       |
//! | `FIELD`    | `ct, x` at one `y`|
//! | `COEFF4D`  | `phi, a, ct, x`   |
//! | `DIAGRAM`  | `a, phi`          |

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use ndarray::{Array2, Array4};
use num_complex::Complex64;

use crate::error::{ApwtError, Result};
use crate::field::FieldSlice;
use crate::lattice::{BoundarySignal, Grid2D, Sector, Spectrum};
use crate::transform::{CoefficientGrid, Diagram, MuSampling, PhiAxis, ScaleAxis};
use crate::wavelets::MotherSpec;

pub const RECORD_LEN: usize = 64;
pub const MAGIC: &str = "APWF/1";
const MAX_RECORDS: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Signal,
    Spectrum,
    Field,
    Coeff4d,
    Diagram,
}

impl Kind {
    fn tag(self) -> &'static str {
        match self {
            Kind::Signal => "SIGNAL",
            Kind::Spectrum => "SPECTRUM",
            Kind::Field => "FIELD",
            Kind::Coeff4d => "COEFF4D",
            Kind::Diagram => "DIAGRAM",
        }
    }

    fn axes(self) -> &'static str {
        match self {
            Kind::Signal | Kind::Field => "ct,x",
            Kind::Spectrum => "omega,kx",
            Kind::Coeff4d => "phi,a,ct,x",
            Kind::Diagram => "a,phi",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Kind {
    type Err = ApwtError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "SIGNAL" => Kind::Signal,
            "SPECTRUM" => Kind::Spectrum,
            "FIELD" => Kind::Field,
            "COEFF4D" => Kind::Coeff4d,
            "DIAGRAM" => Kind::Diagram,
            other => return Err(ApwtError::Format(format!("unknown kind {other:?}"))),
        })
    }
}

/// Untyped contents of an APWF/1 file.
#[derive(Clone, Debug, PartialEq)]
pub struct ApwfFile {
    pub kind: Kind,
    /// Header fields in file order, excluding `kind` and `axes`.
    pub fields: Vec<(String, String)>,
    pub shape: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl ApwfFile {
    fn new(kind: Kind, shape: Vec<usize>, data: Vec<Complex64>) -> Self {
        Self { kind, fields: Vec::new(), shape, data }
    }

    fn set(&mut self, key: &str, value: impl fmt::Debug) -> &mut Self {
        self.fields.push((key.to_string(), format!("{value:?}")));
        self
    }

    fn set_str(&mut self, key: &str, value: &str) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get_str(&self, key: &str) -> Result<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| ApwtError::Format(format!("missing header field {key:?}")))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get_str(key)?;
        raw.parse()
            .map_err(|_| ApwtError::Format(format!("header field {key}={raw:?} does not parse")))
    }

    fn expect_kind(&self, kind: Kind) -> Result<()> {
        if self.kind != kind {
            return Err(ApwtError::Format(format!("expected {kind}, found {}", self.kind)));
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let expected: usize = self.shape.iter().product();
        if expected != self.data.len() {
            return Err(ApwtError::Format(format!(
                "shape {:?} needs {expected} values, have {}",
                self.shape,
                self.data.len()
            )));
        }
        let shape = self.shape.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        let mut records = vec![format!("{MAGIC} {}", self.kind), format!("shape={shape}"), format!("axes={}", self.kind.axes())];
        records.extend(self.fields.iter().map(|(k, v)| format!("{k}={v}")));
        records.push("END".to_string());
        for r in &records {
            if r.len() > RECORD_LEN || !r.is_ascii() || r.contains('\n') {
                return Err(ApwtError::Format(format!("header record {r:?} does not fit")));
            }
            let mut buf = [b' '; RECORD_LEN];
            buf[..r.len()].copy_from_slice(r.as_bytes());
            w.write_all(&buf)?;
        }
        let mut body = Vec::with_capacity(16 * self.data.len());
        for v in &self.data {
            body.extend_from_slice(&v.re.to_le_bytes());
            body.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&body)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut records = Vec::new();
        loop {
            if records.len() >= MAX_RECORDS {
                return Err(ApwtError::Format("header has no END record".into()));
            }
            let mut buf = [0u8; RECORD_LEN];
            r.read_exact(&mut buf).map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => ApwtError::Format("truncated header".into()),
                _ => ApwtError::Io(e),
            })?;
            let text = std::str::from_utf8(&buf)
                .map_err(|_| ApwtError::Format("header record is not ASCII".into()))?
                .trim_end_matches(' ')
                .to_string();
            if text == "END" {
                break;
            }
            records.push(text);
        }
        let first = records.first().ok_or_else(|| ApwtError::Format("empty header".into()))?;
        let kind: Kind = match first.split_once(' ') {
            Some((magic, kind)) if magic == MAGIC => kind.parse()?,
            _ => return Err(ApwtError::Format(format!("bad magic record {first:?}"))),
        };
        let mut fields = Vec::new();
        let mut shape = None;
        for rec in &records[1..] {
            let (k, v) = rec
                .split_once('=')
                .ok_or_else(|| ApwtError::Format(format!("malformed header record {rec:?}")))?;
            match k {
                "shape" => {
                    let dims = v
                        .split(',')
                        .map(|d| d.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| ApwtError::Format(format!("bad shape {v:?}")))?;
                    shape = Some(dims);
                }
                "axes" => {
                    if v != kind.axes() {
                        return Err(ApwtError::Format(format!("{kind} expects axes {}, found {v}", kind.axes())));
                    }
                }
                _ => fields.push((k.to_string(), v.to_string())),
            }
        }
        let shape = shape.ok_or_else(|| ApwtError::Format("missing shape".into()))?;
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(16))
            .ok_or_else(|| ApwtError::Format(format!("shape {shape:?} overflows")))?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != n {
            return Err(ApwtError::Format(format!("body has {} bytes, shape needs {n}", body.len())));
        }
        let data = body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self { kind, fields, shape, data })
    }

    pub fn write_path(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(file))
    }

    pub fn read_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }

    fn set_grid(&mut self, g: &Grid2D) -> &mut Self {
        self.set("dt", g.dt).set("dx", g.dx).set("t0", g.origin.0).set("x0", g.origin.1)
    }

    fn grid(&self) -> Result<Grid2D> {
        let (n_t, n_x) = match self.shape[..] {
            [.., n_t, n_x] => (n_t, n_x),
            _ => return Err(ApwtError::Format(format!("shape {:?} has no grid axes", self.shape))),
        };
        Grid2D::new(n_t, n_x, self.get("dt")?, self.get("dx")?, (self.get("t0")?, self.get("x0")?))
    }

    fn array2(&self) -> Result<Array2<Complex64>> {
        match self.shape[..] {
            [r, c] => Ok(Array2::from_shape_vec((r, c), self.data.clone()).expect("shape checked on read")),
            _ => Err(ApwtError::Format(format!("{} needs a 2D shape, found {:?}", self.kind, self.shape))),
        }
    }

    fn mother(&self) -> Result<MotherSpec> {
        let sector = Sector::try_from(self.get::<u8>("sector")?)?;
        MotherSpec::new(sector, self.get("kappa")?, self.get("sigma_par")?, self.get("sigma_perp")?)
    }
}

fn dense<D: ndarray::Dimension>(a: &ndarray::Array<Complex64, D>) -> Vec<Complex64> {
    a.iter().copied().collect()
}

pub fn encode_signal(s: &BoundarySignal) -> ApwfFile {
    let (n_t, n_x) = s.grid().shape();
    let mut f = ApwfFile::new(Kind::Signal, vec![n_t, n_x], dense(s.values()));
    f.set_grid(s.grid());
    f
}

pub fn decode_signal(f: &ApwfFile) -> Result<BoundarySignal> {
    f.expect_kind(Kind::Signal)?;
    BoundarySignal::new(f.grid()?, f.array2()?)
}

/// Spectra record the coordinate grid they are dual to.
pub fn encode_spectrum(s: &Spectrum) -> ApwfFile {
    let (n_t, n_x) = s.grid().shape();
    let mut f = ApwfFile::new(Kind::Spectrum, vec![n_t, n_x], dense(s.values()));
    f.set_grid(s.grid()).set_str("convention", "minkowski");
    f
}

pub fn decode_spectrum(f: &ApwfFile) -> Result<Spectrum> {
    f.expect_kind(Kind::Spectrum)?;
    if f.get_str("convention")? != "minkowski" {
        return Err(ApwtError::Format(format!("unknown convention {:?}", f.get_str("convention")?)));
    }
    Spectrum::new(f.grid()?, f.array2()?)
}

/// `sector=0` marks the summed total field.
pub fn encode_field(y: f64, sector: Option<Sector>, grid: &Grid2D, values: &Array2<Complex64>) -> ApwfFile {
    let mut f = ApwfFile::new(Kind::Field, vec![grid.n_t, grid.n_x], dense(values));
    f.set_grid(grid).set("y", y).set("sector", sector.map_or(0, u8::from));
    f
}

pub fn encode_field_slice(s: &FieldSlice) -> ApwfFile {
    encode_field(s.y, Some(s.sector), &s.grid, &s.values)
}

/// Returns `(y, sector, signal)`; `sector` is `None` for a total field.
pub fn decode_field(f: &ApwfFile) -> Result<(f64, Option<Sector>, BoundarySignal)> {
    f.expect_kind(Kind::Field)?;
    let sector = match f.get::<u8>("sector")? {
        0 => None,
        j => Some(Sector::try_from(j)?),
    };
    Ok((f.get("y")?, sector, BoundarySignal::new(f.grid()?, f.array2()?)?))
}

pub fn decode_field_slice(f: &ApwfFile) -> Result<FieldSlice> {
    let (y, sector, signal) = decode_field(f)?;
    let sector = sector.ok_or_else(|| ApwtError::Format("total field has no single sector".into()))?;
    Ok(FieldSlice { y, sector, grid: *signal.grid(), values: signal.into_values() })
}

pub fn encode_coefficients(c: &CoefficientGrid) -> ApwfFile {
    let (a, b, t, x) = c.values.dim();
    let mut f = ApwfFile::new(Kind::Coeff4d, vec![a, b, t, x], dense(&c.values));
    f.set_grid(&c.b_grid)
        .set("phi_min", c.sampling.phi.min)
        .set("phi_max", c.sampling.phi.max)
        .set("a_min", c.sampling.scale.min)
        .set("a_max", c.sampling.scale.max)
        .set("sector", u8::from(c.mother.sector))
        .set("kappa", c.mother.kappa)
        .set("sigma_par", c.mother.sigma_par)
        .set("sigma_perp", c.mother.sigma_perp);
    f
}

pub fn decode_coefficients(f: &ApwfFile) -> Result<CoefficientGrid> {
    f.expect_kind(Kind::Coeff4d)?;
    let [n_phi, n_a, n_t, n_x] = f.shape[..] else {
        return Err(ApwtError::Format(format!("COEFF4D needs 4 axes, found {:?}", f.shape)));
    };
    let sampling = MuSampling {
        phi: PhiAxis::new(f.get("phi_min")?, f.get("phi_max")?, n_phi)?,
        scale: ScaleAxis::new(f.get("a_min")?, f.get("a_max")?, n_a)?,
    };
    let values = Array4::from_shape_vec((n_phi, n_a, n_t, n_x), f.data.clone()).expect("shape checked on read");
    CoefficientGrid::new(f.mother()?, sampling, f.grid()?, values)
}

/// Axis values are stored exactly, one per record, so arbitrary axes survive.
pub fn encode_diagram(d: &Diagram) -> Result<ApwfFile> {
    if d.a_axis.len() + d.phi_axis.len() + 8 > MAX_RECORDS {
        return Err(ApwtError::Format("diagram axes too long for the header".into()));
    }
    let data = d.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut f = ApwfFile::new(Kind::Diagram, vec![d.a_axis.len(), d.phi_axis.len()], data);
    for (i, a) in d.a_axis.iter().enumerate() {
        f.set(&format!("a{i}"), a);
    }
    for (i, p) in d.phi_axis.iter().enumerate() {
        f.set(&format!("phi{i}"), p);
    }
    Ok(f)
}

pub fn decode_diagram(f: &ApwfFile) -> Result<Diagram> {
    f.expect_kind(Kind::Diagram)?;
    let values = f.array2()?.mapv(|v| v.re);
    let (n_a, n_phi) = values.dim();
    let a = (0..n_a).map(|i| f.get(&format!("a{i}"))).collect::<Result<Vec<f64>>>()?;
    let phi = (0..n_phi).map(|i| f.get(&format!("phi{i}"))).collect::<Result<Vec<f64>>>()?;
    Diagram::new(a, phi, values)
}
