//! JSON path descriptors, matrix literals, and round-trip-exact float output.
//!
//! A path descriptor is either a named family
//!
//! ```json
//! {"family": "twisted_fourier", "params": {"K": 5}, "t0": -3.14, "t1": 3.14}
//! ```
//!
//! or explicit samples with a declared interpolation
//!
//! ```json
//! {"samples": [{"t": 0, "matrix": {"dim": 1, "entries": [[-1, 0]]}},
//!              {"t": 1, "matrix": {"dim": 1, "entries": [[1, 0]]}}],
//!  "interpolation": "linear"}
//! ```
//!
//! Matrix entries are row-major `[re, im]` pairs.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpecFlowError};
use crate::gallery::{Family, FamilyDescriptor};
use crate::linalg::{ComplexMatrix, C64};
use crate::operator::HermitianOperator;
use crate::path::OperatorPath;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixLiteral {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixLiteral {
    pub fn from_operator(op: &HermitianOperator) -> Self {
        Self { dim: op.dim(), entries: op.matrix().as_slice().iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        if self.entries.len() != self.dim * self.dim {
            return Err(SpecFlowError::Descriptor(format!(
                "matrix of dim {} needs {} entries, got {}",
                self.dim,
                self.dim * self.dim,
                self.entries.len()
            )));
        }
        let data = self.entries.iter().map(|&[re, im]| C64::new(re, im)).collect();
        HermitianOperator::new(ComplexMatrix::new(self.dim, self.dim, data)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub t: f64,
    pub matrix: MatrixLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyPath {
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledPath {
    pub samples: Vec<Sample>,
    pub interpolation: Interpolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PathDescriptor {
    Family(FamilyPath),
    Samples(SampledPath),
}

impl PathDescriptor {
    pub fn family(desc: FamilyDescriptor, t0: Option<f64>, t1: Option<f64>) -> Self {
        PathDescriptor::Family(FamilyPath { family: desc.family, params: desc.params, t0, t1 })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| SpecFlowError::Descriptor(format!("invalid JSON: {e}")))?;
        let obj = value.as_object().ok_or_else(|| SpecFlowError::Descriptor("descriptor must be a JSON object".into()))?;
        let parsed = match (obj.contains_key("family"), obj.contains_key("samples")) {
            (true, false) => serde_json::from_value(value).map(PathDescriptor::Family),
            (false, true) => serde_json::from_value(value).map(PathDescriptor::Samples),
            _ => return Err(SpecFlowError::Descriptor("descriptor needs exactly one of 'family' or 'samples'".into())),
        };
        parsed.map_err(|e| SpecFlowError::Descriptor(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }

    pub fn to_path(&self) -> Result<OperatorPath> {
        match self {
            PathDescriptor::Family(f) => {
                let desc = FamilyDescriptor { family: f.family, params: f.params.clone() };
                let (d0, d1) = desc.default_interval();
                desc.path(f.t0.unwrap_or(d0), f.t1.unwrap_or(d1))
            }
            PathDescriptor::Samples(s) => {
                let samples = s
                    .samples
                    .iter()
                    .map(|x| Ok((x.t, x.matrix.to_operator()?)))
                    .collect::<Result<Vec<_>>>()?;
                match s.interpolation {
                    Interpolation::Linear => OperatorPath::from_samples(samples),
                }
            }
        }
    }
}

/// Writes every `f64` with 17 significant digits, which round-trips exactly.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactFloatFormatter;

impl serde_json::ser::Formatter for ExactFloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }
}

/// `{:.16e}`, i.e. 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON using [`ExactFloatFormatter`].
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter);
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

/// Eigenvalue traces: header `t,mu_1,...,mu_n`, one ascending row per sample.
pub fn spectrum_csv(path: &OperatorPath, samples: usize) -> String {
    let ts = crate::specflow::uniform(path.t0(), path.t1(), samples);
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        ts.par_iter().map(|&t| path.at(t).eigenvalues().to_vec()).collect()
    };
    let mut out = String::from("t");
    for k in 1..=path.dim() {
        out.push_str(&format!(",mu_{k}"));
    }
    out.push('\n');
    for (t, mu) in ts.iter().zip(&rows) {
        out.push_str(&format_f64(*t));
        for m in mu {
            out.push(',');
            out.push_str(&format_f64(*m));
        }
        out.push('\n');
    }
    out
}

/// Reads [`spectrum_csv`] output back as a linearly interpolated path of
/// diagonal operators.
pub fn spectrum_csv_to_descriptor(csv: &str) -> Result<PathDescriptor> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| SpecFlowError::Descriptor("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"t") || cols.len() < 2 {
        return Err(SpecFlowError::Descriptor("CSV header must be t,mu_1,...".into()));
    }
    let dim = cols.len() - 1;
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| SpecFlowError::Descriptor(format!("CSV row {}: {e}", i + 1)))?;
        if vals.len() != dim + 1 {
            return Err(SpecFlowError::Descriptor(format!("CSV row {} has {} fields, expected {}", i + 1, vals.len(), dim + 1)));
        }
        samples.push(Sample {
            t: vals[0],
            matrix: MatrixLiteral::from_operator(&HermitianOperator::from_diag(&vals[1..])),
        });
    }
    Ok(PathDescriptor::Samples(SampledPath { samples, interpolation: Interpolation::Linear }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI, 0.0] {
            let s = to_json_string(&x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(to_json_string(&f64::NAN), "null");
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn family_descriptor_parses() {
        let d = PathDescriptor::from_json(r#"{"family":"normalization","params":{"n_side":3},"t0":-1,"t1":1}"#).unwrap();
        let p = d.to_path().unwrap();
        assert_eq!(p.dim(), 7);
        assert_eq!(PathDescriptor::from_json(&d.to_json()).unwrap(), d);
    }

    #[test]
    fn sample_descriptor_parses() {
        let text = r#"{"samples":[{"t":0,"matrix":{"dim":1,"entries":[[-1,0]]}},
                                  {"t":1,"matrix":{"dim":1,"entries":[[1,0]]}}],
                       "interpolation":"linear"}"#;
        let p = PathDescriptor::from_json(text).unwrap().to_path().unwrap();
        assert_eq!(p.at(0.25).matrix()[(0, 0)].re, -0.5);
    }

    #[test]
    fn bad_descriptors() {
        for text in [
            "[]",
            "{}",
            r#"{"family":"nope"}"#,
            r#"{"samples":[]}"#,
            r#"{"samples":[{"t":0,"matrix":{"dim":2,"entries":[[1,0]]}},{"t":1,"matrix":{"dim":2,"entries":[[1,0]]}}],"interpolation":"linear"}"#,
            r#"{"samples":[{"t":0,"matrix":{"dim":2,"entries":[[0,0],[1,0],[0,0],[0,0]]}},{"t":1,"matrix":{"dim":2,"entries":[[0,0],[1,0],[0,0],[0,0]]}}],"interpolation":"linear"}"#,
        ] {
            let res = PathDescriptor::from_json(text).and_then(|d| d.to_path());
            assert!(res.is_err(), "{text}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let p = crate::gallery::twisted_fourier_path(1, -1.0, 1.0).unwrap();
        let csv = spectrum_csv(&p, 3);
        assert!(csv.starts_with("t,mu_1,mu_2,mu_3\n"));
        let back = spectrum_csv_to_descriptor(&csv).unwrap().to_path().unwrap();
        assert_eq!(back.at(0.0).eigenvalues(), p.at(0.0).eigenvalues());
    }
}
