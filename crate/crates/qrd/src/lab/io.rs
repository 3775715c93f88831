//! JSON file formats for operators, channels and reverse tests, plus CSV helpers.
//!
//! Matrices are stored row-major as `{"dim": d, "re": [...], "im": [...]}`;
//! `im` may be omitted for real matrices. Kraus operators use
//! `{"rows": r, "cols": c, "re": [...], "im": [...]}`.

use crate::channels::Channel;
use crate::classical::WeightVector;
use crate::opcore::{CMat, HermitianOperator, C64};
use crate::reversetests::ReverseTest;
use crate::{Error, ExtendedReal, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

impl MatrixFile {
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let im = if self.im.is_empty() { vec![0.0; self.re.len()] } else { self.im.clone() };
        if self.re.iter().chain(im.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Malformed("non-finite matrix entry".into()));
        }
        HermitianOperator::from_real_rows(self.dim, &self.re, &im)
    }

    pub fn from_operator(op: &HermitianOperator) -> Self {
        let m = op.matrix();
        let d = op.dim();
        let mut re = Vec::with_capacity(d * d);
        let mut im = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        if im.iter().all(|&x| x == 0.0) {
            im.clear();
        }
        MatrixFile { dim: d, re, im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectFile {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub im: Vec<f64>,
}

impl RectFile {
    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.rows * self.cols;
        if self.re.len() != n || !(self.im.is_empty() || self.im.len() == n) {
            return Err(Error::Malformed(format!("expected {n} entries for a {}x{} matrix", self.rows, self.cols)));
        }
        if self.re.iter().chain(self.im.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Malformed("non-finite matrix entry".into()));
        }
        let im = |k: usize| if self.im.is_empty() { 0.0 } else { self.im[k] };
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| C64::new(self.re[i * self.cols + j], im(i * self.cols + j))))
    }

    pub fn from_matrix(m: &CMat) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        if im.iter().all(|&x| x == 0.0) {
            im.clear();
        }
        RectFile { rows, cols, re, im }
    }
}

/// A channel given either by Kraus operators or by its Choi matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub d_in: usize,
    pub d_out: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kraus: Vec<RectFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixFile>,
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<Channel> {
        let ch = match (&self.choi, self.kraus.is_empty()) {
            (Some(choi), true) => Channel::from_choi(self.d_in, self.d_out, &choi.to_operator()?)?,
            (None, false) => Channel::from_kraus(self.kraus.iter().map(RectFile::to_matrix).collect::<Result<_>>()?)?,
            _ => return Err(Error::Malformed("channel needs exactly one of `kraus` or `choi`".into())),
        };
        if ch.d_in() != self.d_in || ch.d_out() != self.d_out {
            return Err(Error::Malformed(format!(
                "declared {}->{} but operators act {}->{}",
                self.d_in,
                self.d_out,
                ch.d_in(),
                ch.d_out()
            )));
        }
        Ok(ch)
    }

    pub fn from_channel(ch: &Channel) -> Self {
        ChannelFile {
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            kraus: ch.kraus().iter().map(RectFile::from_matrix).collect(),
            choi: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseTestFile {
    pub omegas: Vec<MatrixFile>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl ReverseTestFile {
    pub fn to_reverse_test(&self) -> Result<ReverseTest> {
        let omegas = self.omegas.iter().map(MatrixFile::to_operator).collect::<Result<_>>()?;
        ReverseTest::new(omegas, WeightVector::new(self.p.clone())?, WeightVector::new(self.q.clone())?)
    }

    pub fn from_reverse_test(rt: &ReverseTest) -> Self {
        ReverseTestFile {
            omegas: rt.omegas().iter().map(MatrixFile::from_operator).collect(),
            p: rt.p().values().to_vec(),
            q: rt.q().values().to_vec(),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Malformed(format!("{what}: {e}")))
}

pub fn read_operator(path: &Path) -> Result<HermitianOperator> {
    parse_json::<MatrixFile>(&read_text(path)?, &path.display().to_string())?.to_operator()
}

/// Reads a density operator or a PSD weight; only positivity is enforced.
pub fn read_state(path: &Path) -> Result<HermitianOperator> {
    let op = read_operator(path)?;
    op.check_psd()?;
    Ok(op)
}

pub fn read_channel(path: &Path) -> Result<Channel> {
    parse_json::<ChannelFile>(&read_text(path)?, &path.display().to_string())?.to_channel()
}

pub fn read_reverse_test(path: &Path) -> Result<ReverseTest> {
    parse_json::<ReverseTestFile>(&read_text(path)?, &path.display().to_string())?.to_reverse_test()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Malformed(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

/// CSV cell for an extended real: +∞ becomes an empty cell.
pub fn csv_cell(x: ExtendedReal) -> String {
    match x {
        ExtendedReal::Finite(v) => format!("{v}"),
        ExtendedReal::PosInf => String::new(),
        ExtendedReal::NegInf => "-inf".into(),
    }
}

/// Rows of `(alpha, z, value)` as CSV text with a header line.
pub fn sweep_csv(rows: &[(f64, ExtendedReal, ExtendedReal)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Malformed(e.to_string());
    w.write_record(["alpha", "z", "value"]).map_err(err)?;
    for &(alpha, z, value) in rows {
        w.write_record([format!("{alpha}"), csv_cell(z), csv_cell(value)]).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Malformed(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))
}
