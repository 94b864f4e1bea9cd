mod common;

use std::fs;

use common::random_field;
use kinlab::io::{decode_f64, encode_f64, Dtype, FieldFile, FIELD_FORMAT_VERSION};
use kinlab::lp::{FourierGrid, SpectralField};
use kinlab::Error;
use ndarray::Array2;
use proptest::prelude::*;

#[test]
fn encoding_is_little_endian() {
    let bytes = encode_f64(&[1.0, -0.5]);
    assert_eq!(&bytes[..8], &1.0f64.to_le_bytes());
    assert_eq!(&bytes[8..], &(-0.5f64).to_le_bytes());
    assert_eq!(decode_f64(&bytes).unwrap(), vec![1.0, -0.5]);
    assert!(decode_f64(&bytes[..7]).is_err());
    assert_eq!(Dtype::Complex128.size(), 16);
}

#[test]
fn header_records_layout() {
    let grid = FourierGrid::with_length(2, 8, 3.0).unwrap();
    let f = random_field(&grid, 3, 2, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    FieldFile::new(f, Some((6.0, 12))).write(&path).unwrap();
    let header: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(header["version"], FIELD_FORMAT_VERSION);
    assert_eq!(header["dtype"], "complex128");
    assert_eq!(header["endianness"], "little");
    assert_eq!(header["shape"], serde_json::json!([3, 64]));
    assert_eq!(header["payload"], "f.bin");
    assert_eq!(header["grid"]["length"], 3.0);
    assert_eq!(fs::metadata(dir.path().join("f.bin")).unwrap().len(), 3 * 64 * 16);
}

#[test]
fn physical_payloads_are_transformed() {
    let grid = FourierGrid::new(1, 8).unwrap();
    let phys = Array2::from_shape_fn((2, 8), |(r, x)| (r as f64 + 1.0) * (grid.point(x)[0]).sin());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let mut file = FieldFile::new(SpectralField::from_physical(&grid, &phys).unwrap(), None);
    file.header.dtype = Dtype::Float64;
    // write the header by hand around a float64 payload
    file.header.payload = "p.bin".into();
    fs::write(dir.path().join("p.bin"), encode_f64(phys.as_slice().unwrap())).unwrap();
    fs::write(&path, serde_json::to_string(&file.header).unwrap()).unwrap();
    let back = FieldFile::read(&path).unwrap();
    let d = back.field.to_physical() - &phys;
    assert!(d.iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn corrupt_files_are_rejected() {
    let grid = FourierGrid::new(1, 8).unwrap();
    let f = random_field(&grid, 2, 3, 4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    FieldFile::new(f, None).write(&path).unwrap();
    let good = fs::read_to_string(&path).unwrap();

    fs::write(&path, "{ not json").unwrap();
    assert!(matches!(FieldFile::read(&path), Err(Error::Format(_))));
    fs::write(&path, good.replace(FIELD_FORMAT_VERSION, "kinlab-field/0")).unwrap();
    assert!(matches!(FieldFile::read(&path), Err(Error::Format(_))));
    fs::write(&path, good.replace("\"little\"", "\"big\"")).unwrap();
    assert!(matches!(FieldFile::read(&path), Err(Error::Format(_))));
    fs::write(&path, &good).unwrap();
    let bin = dir.path().join("c.bin");
    let bytes = fs::read(&bin).unwrap();
    fs::write(&bin, &bytes[..bytes.len() - 16]).unwrap();
    assert!(matches!(FieldFile::read(&path), Err(Error::Format(_))));
    fs::remove_file(&bin).unwrap();
    assert!(matches!(FieldFile::read(&path), Err(Error::Io(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Write/read is bit-exact, including the velocity metadata.
    #[test]
    fn round_trip_is_bit_exact(seed in 0u64..100_000, rows in 1usize..5, dim in 1usize..3, scale in -1e6f64..1e6) {
        let grid = FourierGrid::new(dim, 8).unwrap();
        let f = random_field(&grid, rows, 3, seed).scaled(scale);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let file = FieldFile::new(f.clone(), Some((5.0, rows)));
        file.write(&path).unwrap();
        let back = FieldFile::read(&path).unwrap();
        prop_assert_eq!(back.header.velocity, Some((5.0, rows)));
        prop_assert_eq!(back.field.real, f.real);
        for (a, b) in back.field.values.iter().zip(f.values.iter()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
