//! Table files: one little-endian `f64` payload plus a JSON sidecar.

use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::collision::basis::InvariantBasis;
use crate::collision::quadrature::{KernelParams, SphereQuadrature, VelocityGrid};
use crate::collision::stencil::StencilTable;
use crate::collision::tables::{CollisionTables, TableDiagnostics, TableOptions};
use crate::error::{Error, Result};
use crate::io::{decode_f64, encode_f64};

pub const TABLE_FORMAT_VERSION: &str = "kinlab-tables/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrayEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableHeader {
    version: String,
    dtype: String,
    endianness: String,
    velocity_half_width: f64,
    velocity_points: usize,
    sphere_nodes: usize,
    kernel: KernelParams,
    options: TableOptions,
    diagnostics: TableDiagnostics,
    arrays: Vec<ArrayEntry>,
    payload: String,
}

/// Writes `path` (JSON sidecar) and `path` with extension `.bin`.
pub fn save_tables(tables: &CollisionTables, path: &Path) -> Result<()> {
    let n = tables.len();
    let mut payload = Vec::with_capacity(n + 3 * n * n);
    let mut arrays = Vec::new();
    let mut push = |name: &str, shape: Vec<usize>, data: &[f64]| {
        arrays.push(ArrayEntry { name: name.to_string(), shape, offset: payload.len() });
        payload.extend_from_slice(data);
    };
    push("nu", vec![n], &tables.nu);
    push("loss", vec![n, n], tables.loss.as_slice().expect("standard layout"));
    push("k2_raw", vec![n, n], tables.k2_raw.as_slice().expect("standard layout"));
    push("k_matrix", vec![n, n], tables.k_matrix.as_slice().expect("standard layout"));
    let bin = path.with_extension("bin");
    let header = TableHeader {
        version: TABLE_FORMAT_VERSION.to_string(),
        dtype: "float64".to_string(),
        endianness: "little".to_string(),
        velocity_half_width: tables.vgrid.half_width(),
        velocity_points: tables.vgrid.points_per_axis(),
        sphere_nodes: tables.sphere.len(),
        kernel: tables.kernel,
        options: tables.options,
        diagnostics: tables.diagnostics,
        arrays,
        payload: bin.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string(),
    };
    fs::write(&bin, encode_f64(&payload))?;
    fs::write(path, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(())
}

/// Reads tables written by [`save_tables`]; stencils and bases are rebuilt.
pub fn load_tables(path: &Path) -> Result<CollisionTables> {
    let text = fs::read_to_string(path)?;
    let header: TableHeader =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("corrupt table header: {e}")))?;
    if header.version != TABLE_FORMAT_VERSION || header.dtype != "float64" || header.endianness != "little" {
        return Err(Error::Format(format!(
            "unsupported table file ({}, {}, {})",
            header.version, header.dtype, header.endianness
        )));
    }
    let vgrid = VelocityGrid::new(header.velocity_half_width, header.velocity_points)?;
    let sphere = SphereQuadrature::fibonacci(header.sphere_nodes)?;
    let n = vgrid.len();
    let bytes = fs::read(path.parent().unwrap_or(Path::new(".")).join(&header.payload))?;
    let data = decode_f64(&bytes)?;
    let get = |name: &str, shape: &[usize]| -> Result<Vec<f64>> {
        let e = header
            .arrays
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| Error::Format(format!("table file lacks array {name}")))?;
        if e.shape != shape {
            return Err(Error::Format(format!("array {name} has shape {:?}, expected {shape:?}", e.shape)));
        }
        let len: usize = shape.iter().product();
        data.get(e.offset..e.offset + len)
            .map(|s| s.to_vec())
            .ok_or_else(|| Error::Format(format!("array {name} runs past the payload")))
    };
    let mat = |name: &str| -> Result<Array2<f64>> {
        Array2::from_shape_vec((n, n), get(name, &[n, n])?).map_err(|e| Error::Format(e.to_string()))
    };
    let nu = get("nu", &[n])?;
    let loss = mat("loss")?;
    let k2_raw = mat("k2_raw")?;
    let k_matrix = mat("k_matrix")?;
    let stencils = StencilTable::build(&vgrid, &sphere, &header.kernel, header.options.interpolation);
    Ok(CollisionTables {
        invariants: InvariantBasis::new(&vgrid),
        vgrid,
        sphere,
        kernel: header.kernel,
        options: header.options,
        nu,
        loss,
        k2_raw,
        k_matrix,
        stencils,
        diagnostics: header.diagnostics,
        galerkin: OnceLock::new(),
    })
}
