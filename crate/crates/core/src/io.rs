//! Frame and matrix files.
//!
//! A frame file is a JSON object
//! `{"dim": 2, "field": "real", "vectors": [[1, 0], [0, 1]], "tol": 1e-10}`.
//! Complex files write each entry as `[re, im]`; `tol` is optional.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::duality::BesselSequence;
use crate::error::{FrameError, Result};
use crate::frame::{Frame, DEFAULT_TOL};
use crate::linalg::{c, CMatrix, Complex64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrameFile {
    dim: usize,
    field: Field,
    vectors: Vec<Vec<Value>>,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrixFile {
    field: Field,
    rows: Vec<Vec<Value>>,
}

fn parse_err(what: &str, err: serde_json::Error) -> FrameError {
    FrameError::Parse(format!("{what}: line {}, column {}: {err}", err.line(), err.column()))
}

fn entry(value: &Value, field: Field, at: &str) -> Result<Complex64> {
    let number = |v: &Value, part: &str| -> Result<f64> {
        let x = v
            .as_f64()
            .ok_or_else(|| FrameError::Parse(format!("{at}{part}: expected a number, found {v}")))?;
        if !x.is_finite() {
            return Err(FrameError::Parse(format!("{at}{part}: non-finite value")));
        }
        Ok(x)
    };
    match (field, value) {
        (_, Value::Number(_)) => Ok(c(number(value, "")?, 0.0)),
        (Field::Complex, Value::Array(pair)) if pair.len() == 2 => {
            Ok(c(number(&pair[0], ".re")?, number(&pair[1], ".im")?))
        }
        (Field::Complex, _) => Err(FrameError::Parse(format!(
            "{at}: expected a number or [re, im], found {value}"
        ))),
        (Field::Real, _) => Err(FrameError::Parse(format!(
            "{at}: real files take plain numbers, found {value}"
        ))),
    }
}

fn rows_to_entries(rows: &[Vec<Value>], field: Field, width: usize, name: &str) -> Result<Vec<Vec<Complex64>>> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            if row.len() != width {
                return Err(FrameError::Parse(format!(
                    "{name}[{i}]: expected {width} entries, found {}",
                    row.len()
                )));
            }
            row.iter()
                .enumerate()
                .map(|(j, v)| entry(v, field, &format!("{name}[{i}][{j}]")))
                .collect()
        })
        .collect()
}

fn raw_frame(text: &str) -> Result<(usize, Vec<Vec<Complex64>>, f64)> {
    let raw: RawFrameFile = serde_json::from_str(text).map_err(|e| parse_err("frame file", e))?;
    if raw.dim == 0 {
        return Err(FrameError::Parse("dim: must be positive".into()));
    }
    let tol = raw.tol.unwrap_or(DEFAULT_TOL);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(FrameError::Parse(format!(
            "tol: must be finite and nonnegative, found {tol}"
        )));
    }
    let vectors = rows_to_entries(&raw.vectors, raw.field, raw.dim, "vectors")?;
    Ok((raw.dim, vectors, tol))
}

pub fn parse_frame(text: &str) -> Result<Frame> {
    let (dim, vectors, tol) = raw_frame(text)?;
    Frame::new(dim, vectors, tol)
}

pub fn read_frame(path: impl AsRef<Path>) -> Result<Frame> {
    parse_frame(&read_text(path.as_ref())?)
}

/// A frame file read as a Bessel sequence; zero vectors and an empty list are allowed.
pub fn parse_bessel(text: &str) -> Result<BesselSequence> {
    let (dim, vectors, _) = raw_frame(text)?;
    BesselSequence::from_vectors(dim, vectors)
}

pub fn read_bessel(path: impl AsRef<Path>) -> Result<BesselSequence> {
    parse_bessel(&read_text(path.as_ref())?)
}

/// A matrix file `{"field": "real", "rows": [[...], ...]}`.
pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let raw: RawMatrixFile = serde_json::from_str(text).map_err(|e| parse_err("matrix file", e))?;
    let width = raw.rows.first().map_or(0, Vec::len);
    if width == 0 {
        return Err(FrameError::Parse("rows: matrix must be nonempty".into()));
    }
    let rows = rows_to_entries(&raw.rows, raw.field, width, "rows")?;
    Ok(CMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    parse_matrix(&read_text(path.as_ref())?)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| FrameError::Parse(format!("{}: {e}", path.display())))
}

fn is_real(z: &Complex64) -> bool {
    z.im.to_bits() == 0
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite floats serialize")
}

fn write_rows<'a>(out: &mut String, rows: impl Iterator<Item = Vec<&'a Complex64>>, real: bool) {
    let rows: Vec<String> = rows
        .map(|row| {
            let entries: Vec<String> = row
                .iter()
                .map(|z| {
                    if real {
                        number(z.re)
                    } else {
                        format!("[{}, {}]", number(z.re), number(z.im))
                    }
                })
                .collect();
            format!("    [{}]", entries.join(", "))
        })
        .collect();
    let _ = write!(out, "{}", rows.join(",\n"));
}

fn render(dim: usize, mat: &CMatrix, tol: Option<f64>) -> String {
    let real = mat.iter().all(is_real);
    let mut out = format!(
        "{{\n  \"dim\": {dim},\n  \"field\": \"{}\",\n",
        if real { "real" } else { "complex" }
    );
    if let Some(tol) = tol {
        let _ = writeln!(out, "  \"tol\": {},", number(tol));
    }
    out.push_str("  \"vectors\": [\n");
    write_rows(
        &mut out,
        (0..mat.ncols()).map(|j| (0..mat.nrows()).map(|i| &mat[(i, j)]).collect()),
        real,
    );
    out.push_str("\n  ]\n}\n");
    out
}

/// Writes a frame file; entries survive a round trip bit for bit.
pub fn frame_to_string(frame: &Frame) -> String {
    render(frame.dim(), frame.synthesis(), Some(frame.tol()))
}

pub fn bessel_to_string(seq: &BesselSequence) -> String {
    render(seq.dim(), seq.matrix(), None)
}

pub fn matrix_to_string(mat: &CMatrix) -> String {
    let real = mat.iter().all(is_real);
    let mut out = format!(
        "{{\n  \"field\": \"{}\",\n  \"rows\": [\n",
        if real { "real" } else { "complex" }
    );
    write_rows(
        &mut out,
        (0..mat.nrows()).map(|i| (0..mat.ncols()).map(|j| &mat[(i, j)]).collect()),
        real,
    );
    out.push_str("\n  ]\n}\n");
    out
}

pub fn write_frame(path: impl AsRef<Path>, frame: &Frame) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, frame_to_string(frame))
        .map_err(|e| FrameError::InvalidArgument(format!("{}: {e}", path.display())))
}

pub fn write_bessel(path: impl AsRef<Path>, seq: &BesselSequence) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, bessel_to_string(seq))
        .map_err(|e| FrameError::InvalidArgument(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{example_family, random_frame};

    #[test]
    fn orthonormal_basis() {
        let f = parse_frame(r#"{"dim":2,"field":"real","vectors":[[1,0],[0,1]]}"#).unwrap();
        let b = f.optimal_bounds();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        assert_eq!(f.tol(), DEFAULT_TOL);
    }

    #[test]
    fn complex_entry() {
        let f = parse_frame(r#"{"dim":1,"field":"complex","vectors":[[[0,1]]]}"#).unwrap();
        assert_eq!(f.synthesis()[(0, 0)], c(0.0, 1.0));
    }

    #[test]
    fn rejects_bad_rows() {
        let e = parse_frame(r#"{"dim":2,"field":"real","vectors":[[1,0,0]]}"#).unwrap_err();
        assert!(matches!(&e, FrameError::Parse(m) if m.contains("vectors[0]")), "{e}");
        let e = parse_frame(r#"{"dim":1,"field":"real","vectors":[[[0,1]]]}"#).unwrap_err();
        assert!(matches!(e, FrameError::Parse(_)));
        let e = parse_frame("{\"dim\":1,\n\"field\":\"real\",\n\"vectors\":[[NaN]]}").unwrap_err();
        assert!(matches!(&e, FrameError::Parse(m) if m.contains("line 3")), "{e}");
        let e = parse_frame(r#"{"dim":1,"field":"real","vectors":[[1e400]]}"#).unwrap_err();
        assert!(matches!(e, FrameError::Parse(_)));
        let e = parse_frame(r#"{"dim":1,"field":"quaternion","vectors":[[1]]}"#).unwrap_err();
        assert!(matches!(e, FrameError::Parse(_)));
    }

    #[test]
    fn round_trip_is_exact() {
        let f = random_frame(3, 5, (0.3, 1.7), 4).unwrap();
        let g = parse_frame(&frame_to_string(&f)).unwrap();
        assert_eq!(f.synthesis(), g.synthesis());
        assert_eq!(f.tol(), g.tol());
        let (phi, u) = example_family(3);
        let text = frame_to_string(&phi);
        assert!(text.contains("\"field\": \"real\""));
        assert_eq!(parse_frame(&text).unwrap().synthesis(), phi.synthesis());
        assert_eq!(parse_bessel(&bessel_to_string(&u)).unwrap().matrix(), u.matrix());
    }

    #[test]
    fn matrices() {
        let m = parse_matrix(r#"{"field":"complex","rows":[[1,[0,2]],[3,4]]}"#).unwrap();
        assert_eq!(m[(0, 1)], c(0.0, 2.0));
        assert_eq!(parse_matrix(&matrix_to_string(&m)).unwrap(), m);
        assert!(parse_matrix(r#"{"field":"real","rows":[[1,2],[3]]}"#).is_err());
    }
}
