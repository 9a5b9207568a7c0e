//! `kps-1` system files: JSON with every float written as a 17-digit
//! decimal string and coefficient matrices stored dense and row-major.

use nlbt::{Mat, NlbtError, PolySystem, PolyVectorField, Result};
use serde::{Deserialize, Serialize};

pub const VERSION: &str = "kps-1";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_num(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| NlbtError::Parse(format!("bad number '{s}'")))
}

pub fn nums(v: &[f64]) -> Vec<String> {
    v.iter().map(|&x| num(x)).collect()
}

pub fn parse_nums(v: &[String]) -> Result<Vec<f64>> {
    v.iter().map(|s| parse_num(s)).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<String>,
}

impl MatJson {
    pub fn from_mat(m: &Mat) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(num(m[(i, j)]));
            }
        }
        MatJson { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_mat(&self) -> Result<Mat> {
        if self.data.len() != self.rows * self.cols {
            return Err(NlbtError::Parse(format!(
                "matrix of {}x{} has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(Mat::from_row_slice(self.rows, self.cols, &parse_nums(&self.data)?))
    }
}

/// Polynomial map as its coefficient blocks for degrees `0..=degree`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldJson {
    pub rows: usize,
    pub nvars: usize,
    pub coeffs: Vec<MatJson>,
}

impl FieldJson {
    pub fn from_field(p: &PolyVectorField) -> Self {
        FieldJson { rows: p.rows, nvars: p.nvars, coeffs: p.coeffs.iter().map(MatJson::from_mat).collect() }
    }

    pub fn to_field(&self) -> Result<PolyVectorField> {
        let coeffs = self.coeffs.iter().map(MatJson::to_mat).collect::<Result<Vec<_>>>()?;
        for (k, c) in coeffs.iter().enumerate() {
            let cols = self.nvars.checked_pow(k as u32).unwrap_or(usize::MAX);
            if c.nrows() != self.rows || c.ncols() != cols {
                return Err(NlbtError::Parse(format!("degree-{k} block has shape {}x{}", c.nrows(), c.ncols())));
            }
        }
        if coeffs.is_empty() {
            return Err(NlbtError::Parse("polynomial without coefficients".into()));
        }
        Ok(PolyVectorField { rows: self.rows, nvars: self.nvars, coeffs })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KpsSystem {
    pub version: String,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub degree: usize,
    pub f: FieldJson,
    pub g: Vec<FieldJson>,
    pub h: FieldJson,
}

impl KpsSystem {
    pub fn from_system(sys: &PolySystem) -> Self {
        KpsSystem {
            version: VERSION.into(),
            n: sys.n,
            m: sys.m,
            p: sys.p,
            degree: sys.degree(),
            f: FieldJson::from_field(&sys.f),
            g: sys.g.iter().map(FieldJson::from_field).collect(),
            h: FieldJson::from_field(&sys.h),
        }
    }

    pub fn to_system(&self) -> Result<PolySystem> {
        if self.version != VERSION {
            return Err(NlbtError::Parse(format!("unsupported version '{}'", self.version)));
        }
        let g = self.g.iter().map(FieldJson::to_field).collect::<Result<Vec<_>>>()?;
        let sys = PolySystem::new(self.f.to_field()?, g, self.h.to_field()?)
            .map_err(|e| NlbtError::Parse(e.to_string()))?;
        if sys.n != self.n || sys.m != self.m || sys.p != self.p {
            return Err(NlbtError::Parse("header dimensions disagree with the coefficients".into()));
        }
        Ok(sys)
    }
}

pub fn to_string(sys: &PolySystem) -> String {
    serde_json::to_string_pretty(&KpsSystem::from_system(sys)).expect("serializable")
}

#[cfg(test)]
pub fn from_str(s: &str) -> Result<PolySystem> {
    let k: KpsSystem = serde_json::from_str(s).map_err(|e| NlbtError::Parse(e.to_string()))?;
    k.to_system()
}
