//! Raw little-endian array files with a JSON header.
//!
//! A field is stored as `<name>.json` (header) next to `<name>.bin`
//! (payload). The payload is the array in row-major order; complex values
//! are interleaved `(re, im)` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{FourierGrid, SpectralField};

pub const FIELD_FORMAT_VERSION: &str = "kinlab-field/1";

/// Element type of a raw payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Float64,
    Complex128,
}

impl Dtype {
    pub fn size(&self) -> usize {
        match self {
            Dtype::Float64 => 8,
            Dtype::Complex128 => 16,
        }
    }
}

/// Spatial grid metadata carried in field headers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridMeta {
    pub dim: usize,
    pub points_per_axis: usize,
    pub length: f64,
}

impl GridMeta {
    pub fn of(grid: &FourierGrid) -> Self {
        Self { dim: grid.dim(), points_per_axis: grid.points_per_axis(), length: grid.length() }
    }

    pub fn grid(&self) -> Result<FourierGrid> {
        FourierGrid::with_length(self.dim, self.points_per_axis, self.length)
    }
}

/// Header of a [`FieldFile`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub version: String,
    pub dtype: Dtype,
    pub shape: Vec<usize>,
    pub endianness: String,
    pub grid: GridMeta,
    /// Physical-space field is real.
    pub real: bool,
    /// Velocity grid `(half_width, points_per_axis)` when rows are velocity nodes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<(f64, usize)>,
    /// Payload file name, relative to the header.
    pub payload: String,
}

impl FieldHeader {
    pub fn payload_bytes(&self) -> usize {
        self.shape.iter().product::<usize>() * self.dtype.size()
    }
}

pub fn encode_f64(values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_f64(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!("payload of {} bytes is not a whole number of f64", bytes.len())));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

/// A spectral field on disk. `complex128` payloads are Fourier coefficients
/// `(rows, modes)`; `float64` payloads are physical samples `(rows, points)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub header: FieldHeader,
    pub field: SpectralField,
}

fn payload_path(header_path: &Path) -> PathBuf {
    header_path.with_extension("bin")
}

impl FieldFile {
    pub fn new(field: SpectralField, velocity: Option<(f64, usize)>) -> Self {
        let header = FieldHeader {
            version: FIELD_FORMAT_VERSION.to_string(),
            dtype: Dtype::Complex128,
            shape: vec![field.values.nrows(), field.values.ncols()],
            endianness: "little".to_string(),
            grid: GridMeta::of(&field.grid),
            real: field.real,
            velocity,
            payload: String::new(),
        };
        Self { header, field }
    }

    /// Writes `path` (JSON header) and `path` with extension `.bin`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let bin = payload_path(path);
        let mut header = self.header.clone();
        header.payload = bin.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        header.dtype = Dtype::Complex128;
        header.shape = vec![self.field.values.nrows(), self.field.values.ncols()];
        header.real = self.field.real;
        let mut flat = Vec::with_capacity(2 * self.field.values.len());
        for v in self.field.values.iter() {
            flat.push(v.re);
            flat.push(v.im);
        }
        fs::write(&bin, encode_f64(&flat))?;
        fs::write(path, serde_json::to_string_pretty(&header)? + "\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let header: FieldHeader =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("corrupt field header: {e}")))?;
        if header.version != FIELD_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported field format {}", header.version)));
        }
        if header.endianness != "little" {
            return Err(Error::Format(format!("unsupported endianness {}", header.endianness)));
        }
        let grid = header.grid.grid()?;
        if header.shape.len() != 2 || header.shape[1] != grid.len() {
            return Err(Error::Format(format!("shape {:?} does not match the grid", header.shape)));
        }
        let bin = path.parent().unwrap_or(Path::new(".")).join(&header.payload);
        let bytes = fs::read(bin)?;
        if bytes.len() != header.payload_bytes() {
            return Err(Error::Format(format!(
                "payload has {} bytes, header promises {}",
                bytes.len(),
                header.payload_bytes()
            )));
        }
        let flat = decode_f64(&bytes)?;
        let shape = (header.shape[0], header.shape[1]);
        let field = match header.dtype {
            Dtype::Complex128 => {
                let values: Vec<Complex64> = flat.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
                let values = Array2::from_shape_vec(shape, values).map_err(|e| Error::Format(e.to_string()))?;
                SpectralField { grid, values, real: header.real }
            }
            // real payloads hold physical samples
            Dtype::Float64 => {
                let phys = Array2::from_shape_vec(shape, flat).map_err(|e| Error::Format(e.to_string()))?;
                SpectralField::from_physical(&grid, &phys)?
            }
        };
        Ok(Self { header, field })
    }
}
