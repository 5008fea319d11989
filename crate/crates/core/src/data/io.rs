//! Dataset files: headered CSV and the binary `UDS1` container.
//!
//! `UDS1` layout: magic `55 44 53 31`, `u32` LE header length, UTF-8 JSON
//! header `{"n":N,"d":D,"k":K}`, `N·D` `f32` LE features (row-major), then
//! `N` `u8` labels.

use std::fs;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const DATASET_MAGIC: [u8; 4] = *b"UDS1";

pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::parse("line 1", e.to_string()))?
        .clone();
    if header.get(0) != Some("label") {
        return Err(Error::parse("line 1", "first header column must be `label`"));
    }
    let d = header.len() - 1;
    if d == 0 {
        return Err(Error::parse("line 1", "header declares no feature columns"));
    }
    for (j, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{j}") {
            return Err(Error::parse(
                "line 1",
                format!("header column {} must be `f{j}`, got `{name}`", j + 1),
            ));
        }
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::parse(format!("line {line}"), e.to_string()))?;
        let raw = record.get(0).unwrap_or_default().trim();
        let label: usize = raw
            .parse()
            .map_err(|_| Error::parse(format!("line {line}"), format!("label `{raw}` is not a nonnegative integer")))?;
        labels.push(label);
        for (j, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::parse(format!("line {line}"), format!("feature f{j} `{field}` is not a number"))
            })?;
            features.push(T::of(v));
        }
    }
    if labels.is_empty() {
        return Err(Error::parse("line 2", "no samples"));
    }
    let k = labels.iter().copied().max().unwrap_or(0) + 1;
    Dataset::new(Tensor::matrix(labels.len(), d, features)?, labels, k)
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let file = fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_csv(file)
}

pub fn save_csv<T: Scalar>(ds: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("label");
    for j in 0..ds.dim() {
        out.push_str(&format!(",f{j}"));
    }
    out.push('\n');
    for (i, &y) in ds.labels().iter().enumerate() {
        out.push_str(&y.to_string());
        for v in ds.features().row(i) {
            out.push_str(&format!(",{}", v.as_f64()));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContainerHeader {
    n: usize,
    d: usize,
    k: usize,
}

/// Serializes to `UDS1`. Features are narrowed to `f32`.
pub fn write_container<T: Scalar>(ds: &Dataset<T>) -> Result<Vec<u8>> {
    if ds.num_classes() > 256 {
        return Err(Error::Config(format!(
            "container labels are u8; {} classes do not fit",
            ds.num_classes()
        )));
    }
    let header = serde_json::to_vec(&ContainerHeader {
        n: ds.len(),
        d: ds.dim(),
        k: ds.num_classes(),
    })
    .map_err(|e| Error::Io(e.to_string()))?;
    let mut out = Vec::with_capacity(8 + header.len() + ds.features().len() * 4 + ds.len());
    out.extend_from_slice(&DATASET_MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for v in ds.features().values() {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
    out.extend(ds.labels().iter().map(|&y| y as u8));
    Ok(out)
}

pub fn read_container<T: Scalar>(bytes: &[u8]) -> Result<Dataset<T>> {
    if bytes.len() < 8 {
        return Err(Error::parse("byte 0", "file shorter than the 8-byte preamble"));
    }
    if bytes[..4] != DATASET_MAGIC {
        return Err(Error::parse("byte 0", format!("bad magic {:02x?}", &bytes[..4])));
    }
    let header_len = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = 8 + header_len;
    if bytes.len() < body {
        return Err(Error::parse(
            "byte 8",
            format!("header needs {header_len} bytes, {} available", bytes.len() - 8),
        ));
    }
    let header: ContainerHeader = serde_json::from_slice(&bytes[8..body])
        .map_err(|e| Error::parse("byte 8", format!("malformed header: {e}")))?;
    if header.n == 0 || header.d == 0 || header.k == 0 {
        return Err(Error::parse("byte 8", "n, d and k must be positive"));
    }
    let feature_bytes = header
        .n
        .checked_mul(header.d)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| Error::parse("byte 8", "n·d overflows"))?;
    let expected = body + feature_bytes + header.n;
    if bytes.len() != expected {
        return Err(Error::parse(
            format!("byte {}", bytes.len().min(expected)),
            format!("payload is {} bytes, header implies {expected}", bytes.len()),
        ));
    }
    let features: Vec<T> = bytes[body..body + feature_bytes]
        .chunks_exact(4)
        .map(|c| T::of(f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64))
        .collect();
    let label_start = body + feature_bytes;
    let mut labels = Vec::with_capacity(header.n);
    for (i, &y) in bytes[label_start..].iter().enumerate() {
        if y as usize >= header.k {
            return Err(Error::parse(
                format!("byte {}", label_start + i),
                format!("label {y} ≥ declared k = {}", header.k),
            ));
        }
        labels.push(y as usize);
    }
    Dataset::new(Tensor::matrix(header.n, header.d, features)?, labels, header.k)
}

pub fn load_container<T: Scalar>(path: impl AsRef<Path>) -> Result<Dataset<T>> {
    let bytes = fs::read(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_container(&bytes)
}

pub fn save_container<T: Scalar>(ds: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_container(ds)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Dataset<f64>> {
        read_csv(s.as_bytes())
    }

    #[test]
    fn minimal_csv() {
        let d = parse("label,f0,f1\n1,0.5,0.25").unwrap();
        assert_eq!((d.len(), d.dim(), d.num_classes()), (1, 2, 2));
        assert_eq!(d.labels(), &[1]);
        assert_eq!(d.features().values(), &[0.5, 0.25]);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let bad_header = parse("y,f0\n0,1").unwrap_err();
        assert!(matches!(bad_header, Error::Parse { ref location, .. } if location == "line 1"));
        let ragged = parse("label,f0,f1\n0,1,2\n1,3\n").unwrap_err();
        assert!(matches!(ragged, Error::Parse { .. }), "{ragged:?}");
        let negative = parse("label,f0\n0,1\n-1,2\n").unwrap_err();
        assert!(matches!(negative, Error::Parse { ref location, .. } if location == "line 3"));
        let fractional = parse("label,f0\n1.5,2\n").unwrap_err();
        assert!(matches!(fractional, Error::Parse { .. }));
        assert!(parse("label,f0\n0,abc\n").is_err());
        assert!(parse("label,f0\n").is_err());
    }

    fn sample() -> Dataset<f64> {
        let f = Tensor::matrix(3, 2, vec![0.5, -1.25, 3.0, 1e-3, -7.5, 2.0]).unwrap();
        Dataset::new(f, vec![0, 2, 1], 3).unwrap()
    }

    #[test]
    fn container_round_trip() {
        let d = sample();
        let bytes = write_container(&d).unwrap();
        assert_eq!(&bytes[..4], &[0x55, 0x44, 0x53, 0x31]);
        let back: Dataset<f64> = read_container(&bytes).unwrap();
        assert_eq!(back.labels(), d.labels());
        let narrowed: Vec<f64> = d.features().values().iter().map(|&v| v as f32 as f64).collect();
        assert_eq!(back.features().values(), narrowed.as_slice());
        assert_eq!(write_container(&back).unwrap(), bytes);
    }

    #[test]
    fn truncated_container_fails() {
        let bytes = write_container(&sample()).unwrap();
        for cut in [0, 3, 7, 12, bytes.len() - 1] {
            assert!(read_container::<f64>(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn container_label_beyond_k() {
        let mut bytes = write_container(&sample()).unwrap();
        let last = bytes.len() - 1;
        bytes[last] = 3;
        let err = read_container::<f64>(&bytes).unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location == &format!("byte {last}")));
    }

    #[test]
    fn csv_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        save_csv(&sample(), &path).unwrap();
        let back: Dataset<f64> = load_csv(&path).unwrap();
        assert_eq!(back, sample());
    }
}
