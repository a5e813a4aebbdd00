use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::linalg::DenseMatrix;

use super::{HarnessError, ParseLocation};

pub const BINARY_MAGIC: &[u8; 4] = b"RBCM";
pub const BINARY_VERSION: u32 = 1;
const HEADER_LEN: u64 = 4 + 4 + 8 + 8;

/// Samples as columns of a `d×N` matrix with 0-based class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: DenseMatrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl LabeledDataset {
    /// Checks `labels` against `features` and that every class in
    /// `[0, class_count)` is populated.
    pub fn new(features: DenseMatrix, labels: Vec<usize>, class_count: usize) -> Result<Self, HarnessError> {
        if labels.len() != features.cols() {
            return Err(HarnessError::DimensionMismatch(format!(
                "{} labels for {} feature columns",
                labels.len(),
                features.cols()
            )));
        }
        let mut sizes = vec![0usize; class_count];
        for (j, &l) in labels.iter().enumerate() {
            if l >= class_count {
                return Err(HarnessError::DimensionMismatch(format!(
                    "label {l} of sample {j} is outside [0, {class_count})"
                )));
            }
            sizes[l] += 1;
        }
        if let Some(c) = sizes.iter().position(|&s| s == 0) {
            return Err(HarnessError::EmptyClass(c));
        }
        Ok(Self { features, labels, class_count })
    }

    pub fn dim(&self) -> usize {
        self.features.rows()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.class_count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Columns `idx` with their labels, keeping `class_count`.
    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_columns(idx),
            labels: idx.iter().map(|&j| self.labels[j]).collect(),
            class_count: self.class_count,
        }
    }
}

/// Loads features (CSV or binary) and labels. The binary reader is used when
/// the extension is `.bin`/`.rbcm` or the file starts with the magic bytes.
pub fn load_dataset(features_path: &Path, labels_path: &Path) -> Result<LabeledDataset, HarnessError> {
    let features = load_features(features_path)?;
    let labels = load_labels(labels_path)?;
    let class_count = labels.iter().max().map_or(0, |m| m + 1);
    LabeledDataset::new(features, labels, class_count)
}

pub fn load_features(path: &Path) -> Result<DenseMatrix, HarnessError> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    let binary_ext = matches!(path.extension().and_then(|e| e.to_str()), Some("bin" | "rbcm"));
    if binary_ext || bytes.starts_with(BINARY_MAGIC) {
        parse_binary(path, &bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|e| {
            let off = e.utf8_error().valid_up_to() as u64;
            HarnessError::Parse { path: path.into(), at: ParseLocation::Offset(off), message: "invalid UTF-8".into() }
        })?;
        parse_csv(path, &text)
    }
}

fn parse_csv(path: &Path, text: &str) -> Result<DenseMatrix, HarnessError> {
    let err = |line: usize, message: String| HarnessError::Parse {
        path: path.into(),
        at: ParseLocation::Line(line),
        message,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(k, field)| {
                let field = field.trim();
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(err(i + 1, format!("column {}: {field:?} is not a finite number", k + 1))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(err(i + 1, format!("expected {} columns, found {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(err(1, "no data".into()));
    }
    let (d, n) = (rows.len(), rows[0].len());
    Ok(DenseMatrix::new(d, n, rows.concat())?)
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<DenseMatrix, HarnessError> {
    let err =
        |off: u64, message: String| HarnessError::Parse { path: path.into(), at: ParseLocation::Offset(off), message };
    let read = |off: usize, len: usize| -> Result<&[u8], HarnessError> {
        bytes.get(off..off + len).ok_or_else(|| err(off as u64, "unexpected end of file".into()))
    };
    if read(0, 4)? != BINARY_MAGIC {
        return Err(err(0, "bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(read(4, 4)?.try_into().unwrap());
    if version != BINARY_VERSION {
        return Err(err(4, format!("unsupported version {version}")));
    }
    let d = u64::from_le_bytes(read(8, 8)?.try_into().unwrap());
    let n = u64::from_le_bytes(read(16, 8)?.try_into().unwrap());
    if d == 0 || n == 0 {
        return Err(err(8, format!("empty matrix {d}x{n}")));
    }
    let expected = d
        .checked_mul(n)
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| err(8, format!("matrix {d}x{n} is too large")))?;
    if bytes.len() as u64 != expected {
        let at = (bytes.len() as u64).min(expected);
        return Err(err(at, format!("expected {expected} bytes, file has {}", bytes.len())));
    }
    let (d, n) = (d as usize, n as usize);
    let values: Vec<f64> =
        bytes[HEADER_LEN as usize..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(err(HEADER_LEN + 8 * k as u64, "non-finite value".into()));
    }
    // stored column-major
    Ok(DenseMatrix::from_fn(d, n, |i, j| values[j * d + i]))
}

/// One 0-based integer per line; blank lines are skipped.
pub fn load_labels(path: &Path) -> Result<Vec<usize>, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let l = line.parse::<usize>().map_err(|_| HarnessError::Parse {
            path: path.into(),
            at: ParseLocation::Line(i + 1),
            message: format!("{line:?} is not a non-negative integer"),
        })?;
        labels.push(l);
    }
    if labels.is_empty() {
        return Err(HarnessError::Parse { path: path.into(), at: ParseLocation::Line(1), message: "no labels".into() });
    }
    Ok(labels)
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, HarnessError> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

pub fn write_features_binary(path: &Path, x: &DenseMatrix) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    w.write_all(BINARY_MAGIC).map_err(io)?;
    w.write_all(&BINARY_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(x.rows() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(x.cols() as u64).to_le_bytes()).map_err(io)?;
    for j in 0..x.cols() {
        for i in 0..x.rows() {
            w.write_all(&x[(i, j)].to_le_bytes()).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// `d` lines of `N` comma-separated values, shortest round-trip formatting.
pub fn write_features_csv(path: &Path, x: &DenseMatrix) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    for i in 0..x.rows() {
        let line: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    for l in labels {
        writeln!(w, "{l}").map_err(|e| HarnessError::io(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Column indices of the first `k` samples of every class (train) and the
/// rest (test), both in file order.
pub fn first_k_indices(
    labels: &[usize],
    class_count: usize,
    k: usize,
) -> Result<(Vec<usize>, Vec<usize>), HarnessError> {
    if k == 0 {
        return Err(HarnessError::InvalidConfig("train_per_class must be at least 1".into()));
    }
    let mut sizes = vec![0usize; class_count];
    for &l in labels {
        sizes[l] += 1;
    }
    if let Some((class, &size)) = sizes.iter().enumerate().find(|(_, &s)| s <= k) {
        return Err(HarnessError::ClassTooSmall { class, size, k });
    }
    let mut seen = vec![0usize; class_count];
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (j, &l) in labels.iter().enumerate() {
        if seen[l] < k {
            train.push(j);
        } else {
            test.push(j);
        }
        seen[l] += 1;
    }
    Ok((train, test))
}

/// Per class, the first `k` samples in file order train and the rest test.
pub fn split_first_k(ds: &LabeledDataset, k: usize) -> Result<(LabeledDataset, LabeledDataset), HarnessError> {
    let (train, test) = first_k_indices(&ds.labels, ds.class_count, k)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}
