//! The `CSAF` tensor container.
//!
//! Layout: magic `CSAF`, version `u16`, dtype `u8` (0 = f32, 1 = u8), rank
//! `u8`, then `rank` little-endian `u64` dims and a row-major payload.
//! Depth, intensity and operator payloads are f32; masks are u8 0/1.

use std::fs;
use std::path::Path;

use cosparse_core::{AnalysisOperator, Modality, ScalarField, SemanticField};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CSAF";
pub const VERSION: u16 = 1;

/// Row-norm tolerance applied when loading f32 operators.
pub const LOAD_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    F32(Vec<f32>),
    U8(Vec<u8>),
}

impl Payload {
    fn dtype(&self) -> u8 {
        match self {
            Payload::F32(_) => 0,
            Payload::U8(_) => 1,
        }
    }

    fn len(&self) -> usize {
        match self {
            Payload::F32(v) => v.len(),
            Payload::U8(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    payload: Payload,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, payload: Payload) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ZeroRank);
        }
        if dims.len() > u8::MAX as usize {
            return Err(Error::Shape(format!("rank {} exceeds 255", dims.len())));
        }
        let count: usize = dims.iter().product();
        if count != payload.len() {
            return Err(Error::Shape(format!(
                "dims {dims:?} hold {count} values, payload has {}",
                payload.len()
            )));
        }
        Ok(Self { dims, payload })
    }

    pub fn f32(dims: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        Self::new(dims, Payload::F32(values))
    }

    pub fn u8(dims: Vec<usize>, values: Vec<u8>) -> Result<Self> {
        Self::new(dims, Payload::U8(values))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.dims.len() + 4 * self.payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.payload.dtype());
        out.push(self.dims.len() as u8);
        for &d in &self.dims {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        match &self.payload {
            Payload::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            Payload::U8(v) => out.extend_from_slice(v),
        }
        out
    }

    /// Parses a serialized tensor; `path` only labels errors.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let truncated = |expected: u64| Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            actual: bytes.len() as u64,
        };
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic(path.to_path_buf()));
        }
        if bytes.len() < 8 {
            return Err(truncated(8));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::UnsupportedVersion {
                path: path.to_path_buf(),
                version,
            });
        }
        let dtype = bytes[6];
        let width = match dtype {
            0 => 4u64,
            1 => 1,
            _ => {
                return Err(Error::UnsupportedDtype {
                    path: path.to_path_buf(),
                    dtype,
                })
            }
        };
        let rank = bytes[7] as usize;
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        let header = 8 + 8 * rank;
        if bytes.len() < header {
            return Err(truncated(header as u64));
        }
        let dims: Vec<u64> = bytes[8..header]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let expected = dims
            .iter()
            .try_fold(width, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_add(header as u64))
            .ok_or_else(|| Error::Shape(format!("dims {dims:?} overflow")))?;
        if bytes.len() as u64 != expected {
            return Err(truncated(expected));
        }
        let body = &bytes[header..];
        let payload = match dtype {
            0 => Payload::F32(
                body.chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
                    .collect(),
            ),
            _ => Payload::U8(body.to_vec()),
        };
        let dims = dims
            .into_iter()
            .map(|d| usize::try_from(d).map_err(|_| Error::Shape(format!("dimension {d} too large"))))
            .collect::<Result<_>>()?;
        Self::new(dims, payload)
    }

    fn expect_f32(&self, what: &str) -> Result<&[f32]> {
        match &self.payload {
            Payload::F32(v) => Ok(v),
            Payload::U8(_) => Err(Error::Shape(format!("{what} must be stored as f32"))),
        }
    }

    fn expect_rank(&self, rank: usize, what: &str) -> Result<()> {
        if self.dims.len() != rank {
            return Err(Error::Shape(format!("{what} must have rank {rank}, got dims {:?}", self.dims)));
        }
        Ok(())
    }

    /// `[height, width]` f32 tensor.
    pub fn from_scalar_field(field: &ScalarField) -> Self {
        let values = field.values().iter().map(|&v| v as f32).collect();
        Self::f32(vec![field.height(), field.width()], values).expect("field dims match its values")
    }

    pub fn to_scalar_field(&self) -> Result<ScalarField> {
        self.expect_rank(2, "scalar field")?;
        let values = self.expect_f32("scalar field")?.iter().map(|&v| v as f64).collect();
        Ok(ScalarField::new(self.dims[1], self.dims[0], values)?)
    }

    /// `[height, width, classes]` f32 tensor.
    pub fn from_semantic_field(field: &SemanticField) -> Self {
        let values = field.probs().iter().map(|&v| v as f32).collect();
        Self::f32(vec![field.height(), field.width(), field.num_classes()], values).expect("field dims match its values")
    }

    pub fn to_semantic_field(&self) -> Result<SemanticField> {
        self.expect_rank(3, "semantic field")?;
        let values = self.expect_f32("semantic field")?.iter().map(|&v| v as f64).collect();
        Ok(SemanticField::new(self.dims[1], self.dims[0], self.dims[2], values)?)
    }

    /// `[height, width]` u8 tensor holding 1 for observed pixels.
    pub fn from_mask(width: usize, height: usize, mask: &[bool]) -> Result<Self> {
        Self::u8(vec![height, width], mask.iter().map(|&b| b as u8).collect())
    }

    pub fn to_mask(&self) -> Result<(usize, usize, Vec<bool>)> {
        self.expect_rank(2, "mask")?;
        let Payload::U8(v) = &self.payload else {
            return Err(Error::Shape("mask must be stored as u8".into()));
        };
        if v.iter().any(|&b| b > 1) {
            return Err(Error::Shape("mask entries must be 0 or 1".into()));
        }
        Ok((self.dims[1], self.dims[0], v.iter().map(|&b| b == 1).collect()))
    }

    /// `[k, n]` f32 tensor, row-major.
    pub fn from_operator(op: &AnalysisOperator) -> Self {
        let values = op.to_row_major().into_iter().map(|v| v as f32).collect();
        Self::f32(vec![op.rows(), op.cols()], values).expect("operator dims match its entries")
    }

    /// Loads an operator, renormalizing rows in f64 after checking they are
    /// within [`LOAD_NORM_TOL`] of unit norm.
    pub fn to_operator(&self, modality: Modality) -> Result<AnalysisOperator> {
        self.expect_rank(2, "operator")?;
        let values: Vec<f64> = self.expect_f32("operator")?.iter().map(|&v| v as f64).collect();
        Ok(AnalysisOperator::from_row_major(
            modality,
            self.dims[0],
            self.dims[1],
            &values,
            LOAD_NORM_TOL,
        )?)
    }
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Tensor::from_bytes(&bytes, path)
}

pub fn write_tensor(path: &Path, tensor: &Tensor) -> Result<()> {
    fs::write(path, tensor.to_bytes()).map_err(|e| Error::io(path, e))
}
